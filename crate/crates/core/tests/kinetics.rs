mod common;

use common::{lone_channel, neon_table, rel, PHOTON_EV};
use ionkin_core::kinetics::{
    analytic_single_channel, integrate, ChannelMode, Kinetics, KineticsOptions, PopulationVector,
};
use ionkin_core::model::{CrossSection, NUM_SPECIES};
use ionkin_core::pulse::{
    gaussian_envelope, intensity_to_flux, ChaoticPulseGenerator, ChaoticPulseSpec, DeterministicPulseSpec,
};
use ionkin_core::rng::stream_rng;
use ionkin_core::Error;

fn envelope(fwhm: f64, intensity: f64) -> DeterministicPulseSpec {
    DeterministicPulseSpec::new(fwhm, intensity_to_flux(intensity, PHOTON_EV), 6.0 * fwhm)
}

fn tight() -> KineticsOptions {
    KineticsOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-320,
        ..KineticsOptions::default()
    }
}

#[test]
fn conservation_and_positivity_over_deterministic_scan() {
    let table = neon_table();
    for mode in [ChannelMode::SequentialOnly, ChannelMode::SequentialPlusDirect] {
        let kin = Kinetics::new(&table, &KineticsOptions::with_mode(mode)).unwrap();
        for k in 0..=50 {
            let i = 10f64.powf(13.0 + 0.1 * k as f64);
            let rec = gaussian_envelope(&envelope(30e-15, i)).unwrap();
            let out = kin.integrate(&PopulationVector::neutral(), &rec).unwrap();
            assert!(out.stats.max_conservation_error < 1e-9, "I={i:e}");
            assert!(out.stats.min_population > -1e-12, "I={i:e}");
        }
    }
}

#[test]
fn conservation_on_chaotic_records() {
    let table = neon_table();
    let kin = Kinetics::new(&table, &KineticsOptions::default()).unwrap();
    for i in [1e14, 3e15, 1e17] {
        let spec = ChaoticPulseSpec::new(envelope(30e-15, i), 6e-15, 0);
        let g = ChaoticPulseGenerator::new(&spec).unwrap();
        for r in 0..20 {
            let rec = g.generate(&mut stream_rng(9, 0, r));
            let out = kin.integrate(&PopulationVector::neutral(), &rec).unwrap();
            assert!(out.stats.max_conservation_error < 1e-9);
            assert!(out.stats.min_population > -1e-12);
        }
    }
}

#[test]
fn one_photon_oracle_over_six_decades() {
    let spec = {
        let mut s = DeterministicPulseSpec::new(30e-15, 1e30, 240e-15);
        s.samples_per_fwhm = 1024;
        s
    };
    let rec = gaussian_envelope(&spec).unwrap();
    for k in 0..=12 {
        let sphi = 10f64.powf(-3.0 + 0.5 * k as f64);
        let sigma = sphi / spec.fluence();
        let out = integrate(&PopulationVector::neutral(), &rec, &lone_channel(1, sigma), &tight()).unwrap();
        let oracle = analytic_single_channel(CrossSection::from_value(sigma).unwrap(), &rec, 1);
        let exact = (-sphi).exp();
        if exact > 1e-300 {
            assert!(rel(out.populations.get(0), oracle) < 1e-8, "sPhi={sphi:e}");
            assert!(rel(out.populations.get(0), exact) < 1e-8, "sPhi={sphi:e}");
        } else {
            assert!(out.populations.get(0) < 1e-300 && oracle < 1e-300);
        }
        assert!(rel(out.populations.get(1), -(-sphi).exp_m1()) < 1e-8);
    }
}

#[test]
fn two_photon_oracle_uses_narrowed_width() {
    let mut spec = DeterministicPulseSpec::new(30e-15, 1e31, 240e-15);
    spec.samples_per_fwhm = 1024;
    let rec = gaussian_envelope(&spec).unwrap();
    let eff = spec.peak_flux * spec.peak_flux * spec.fwhm * 1.064_467_019_431_226_2 / 2f64.sqrt();
    for sphi in [1e-3, 1e-1, 1.0, 10.0, 100.0] {
        let sigma = sphi / eff;
        let out = integrate(&PopulationVector::neutral(), &rec, &lone_channel(2, sigma), &tight()).unwrap();
        assert!(rel(out.populations.get(0), (-sphi).exp()) < 1e-8, "sPhi={sphi:e}");
    }
}

#[test]
fn strong_field_limit_is_fully_stripped() {
    let rec = gaussian_envelope(&envelope(30e-15, 1e18)).unwrap();
    let out = integrate(&PopulationVector::neutral(), &rec, &neon_table(), &KineticsOptions::default()).unwrap();
    assert!(out.populations.get(NUM_SPECIES - 1) > 1.0 - 1e-9);
}

#[test]
fn closed_direct_channels_reproduce_sequential_mode() {
    let table = neon_table();
    let closed = table.with_direct_closed();
    for i in [1e13, 1e15, 3e15, 1e17] {
        let rec = gaussian_envelope(&envelope(5e-15, i)).unwrap();
        let a = integrate(
            &PopulationVector::neutral(),
            &rec,
            &table,
            &KineticsOptions::with_mode(ChannelMode::SequentialOnly),
        )
        .unwrap();
        let b = integrate(
            &PopulationVector::neutral(),
            &rec,
            &closed,
            &KineticsOptions::with_mode(ChannelMode::SequentialPlusDirect),
        )
        .unwrap();
        for j in 0..NUM_SPECIES {
            assert!((a.populations.get(j) - b.populations.get(j)).abs() <= 1e-12, "I={i:e} j={j}");
        }
        assert_eq!(a.stats.accepted, b.stats.accepted);
    }
}

/// Log-log slope of each species' yield between two low intensities.
fn slopes(table: &ionkin_core::model::ChannelTable, mode: ChannelMode, i_lo: f64) -> Vec<f64> {
    let i_hi = 2.0 * i_lo;
    let opts = KineticsOptions::with_mode(mode);
    let y = |i: f64| {
        let rec = gaussian_envelope(&envelope(30e-15, i)).unwrap();
        *integrate(&PopulationVector::neutral(), &rec, table, &opts).unwrap().populations.as_array()
    };
    let (a, b) = (y(i_lo), y(i_hi));
    (1..NUM_SPECIES).map(|j| (b[j] / a[j]).ln() / 2f64.ln()).collect()
}

#[test]
fn perturbative_slopes_follow_photon_orders() {
    let table = neon_table();
    let seq = slopes(&table, ChannelMode::SequentialOnly, 1e10);
    for (got, want) in seq.iter().zip([1.0, 2.0, 3.0, 5.0, 7.0, 9.0, 12.0, 15.0]) {
        assert!(rel(*got, want) < 0.02, "sequential slope {got} vs {want}");
    }
    let direct = slopes(&table, ChannelMode::SequentialPlusDirect, 1e10);
    for (got, want) in direct.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 11.0]) {
        assert!(rel(*got, want) < 0.02, "direct slope {got} vs {want}");
    }
}

#[test]
fn step_budget_exhaustion_is_reported() {
    let rec = gaussian_envelope(&envelope(30e-15, 1e16)).unwrap();
    let opts = KineticsOptions {
        max_steps: 10,
        ..KineticsOptions::default()
    };
    let err = integrate(&PopulationVector::neutral(), &rec, &neon_table(), &opts).unwrap_err();
    assert!(matches!(err, Error::IntegrationFailure { t, .. } if t.is_finite()));
}

#[test]
fn invalid_options_are_rejected() {
    let opts = KineticsOptions {
        rel_tol: 0.0,
        ..KineticsOptions::default()
    };
    assert!(matches!(Kinetics::new(&neon_table(), &opts), Err(Error::Config(_))));
}
