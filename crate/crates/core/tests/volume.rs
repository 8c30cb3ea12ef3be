mod common;

use common::{lone_channel, PHOTON_EV};
use ionkin_core::kinetics::{analytic_single_channel, KineticsOptions, PopulationVector, integrate};
use ionkin_core::model::{CrossSection, NUM_SPECIES};
use ionkin_core::pulse::{gaussian_envelope, intensity_to_flux, DeterministicPulseSpec};
use ionkin_core::volume::{
    beam_average_3d, radial_average_2d, volume_average, volume_average_fn, VolumeKind, VolumeModel, YieldCurve,
};

fn one_photon_yield(i: f64) -> [f64; NUM_SPECIES] {
    // Closed form for a 1-photon channel: 1 - exp(-sigma Phi).
    let env = DeterministicPulseSpec::new(30e-15, intensity_to_flux(i, PHOTON_EV), 180e-15);
    let p = -(-1e-18 * env.fluence()).exp_m1();
    let mut y = [0.0; NUM_SPECIES];
    y[0] = 1.0 - p;
    y[1] = p;
    y
}

#[test]
fn transverse_model_matches_radial_quadrature() {
    let m = VolumeModel::new(VolumeKind::GaussianTransverse2d);
    for i0 in [1e13, 3e14, 1e16] {
        let a = volume_average_fn(one_photon_yield, &m, i0).unwrap();
        let b = radial_average_2d(one_photon_yield, i0, m.w0_cm, m.fmin, 4000);
        for j in 0..2 {
            assert!(((a.yields[j] - b[j]) / b[j]).abs() < 1e-4, "I0={i0:e} j={j}: {} vs {}", a.yields[j], b[j]);
        }
        assert!(a.error_estimate < 1e-4);
    }
}

#[test]
fn beam_model_matches_nested_quadrature() {
    let m = VolumeModel::new(VolumeKind::GaussianBeam3d);
    for i0 in [1e13, 3e14, 1e16] {
        let a = volume_average_fn(one_photon_yield, &m, i0).unwrap();
        let b = beam_average_3d(one_photon_yield, i0, m.fmin, 400);
        for j in 0..2 {
            assert!(((a.yields[j] - b[j]) / b[j]).abs() < 1e-4, "I0={i0:e} j={j}: {} vs {}", a.yields[j], b[j]);
        }
    }
}

#[test]
fn interpolated_curve_agrees_with_closed_form_average() {
    let m = VolumeModel::new(VolumeKind::GaussianTransverse2d);
    let curve = YieldCurve::sample(1e9, 1e17, 25, |i| Ok(one_photon_yield(i))).unwrap();
    for i0 in [1e14, 1e16, 1e17] {
        let a = volume_average(&curve, &m, i0).unwrap();
        let b = radial_average_2d(one_photon_yield, i0, m.w0_cm, m.fmin, 4000);
        assert!(((a.yields[1] - b[1]) / b[1]).abs() < 1e-4, "I0={i0:e}");
    }
}

#[test]
fn constant_curve_is_normalized_for_every_model() {
    let curve = YieldCurve::sample(1e10, 1e18, 25, |_| Ok([1.0; NUM_SPECIES])).unwrap();
    for kind in [VolumeKind::None, VolumeKind::GaussianTransverse2d, VolumeKind::GaussianBeam3d] {
        let a = volume_average(&curve, &VolumeModel::new(kind), 1e17).unwrap();
        assert!(a.yields.iter().all(|y| (y - 1.0).abs() < 1e-12), "{kind}");
    }
}

#[test]
fn saturating_curves_average_monotonically() {
    // Non-decreasing then flat: 1 - exp(-(I/Is)^n).
    for kind in [VolumeKind::GaussianTransverse2d, VolumeKind::GaussianBeam3d] {
        let m = VolumeModel::new(kind);
        for n in [1, 2, 5] {
            let f = |i: f64| {
                let mut y = [0.0; NUM_SPECIES];
                y[1] = -(-(i / 1e15).powi(n)).exp_m1();
                y
            };
            let mut prev = 0.0;
            for k in 0..=40 {
                let i0 = 10f64.powf(13.0 + 0.125 * k as f64);
                let v = volume_average_fn(f, &m, i0).unwrap().yields[1];
                assert!(v >= prev * (1.0 - 1e-12), "{kind} n={n} I0={i0:e}");
                prev = v;
            }
        }
    }
}

#[test]
fn uncovered_interval_is_input_error() {
    let curve = YieldCurve::sample(1e13, 1e16, 25, |i| Ok(one_photon_yield(i))).unwrap();
    let m = VolumeModel::new(VolumeKind::GaussianBeam3d);
    assert!(matches!(volume_average(&curve, &m, 1e16), Err(ionkin_core::Error::Input(_))));
}

#[test]
fn oracle_survival_feeds_volume_average() {
    // The kinetics result and the analytic survival give the same average.
    let m = VolumeModel::new(VolumeKind::GaussianTransverse2d);
    let table = lone_channel(2, 1e-51);
    let opts = KineticsOptions::default();
    let integrated = YieldCurve::sample(1e10, 1e17, 25, |i| {
        let env = DeterministicPulseSpec::new(30e-15, intensity_to_flux(i, PHOTON_EV), 180e-15);
        let rec = gaussian_envelope(&env)?;
        Ok(*integrate(&PopulationVector::neutral(), &rec, &table, &opts)?.populations.as_array())
    })
    .unwrap();
    let analytic = YieldCurve::sample(1e10, 1e17, 25, |i| {
        let env = DeterministicPulseSpec::new(30e-15, intensity_to_flux(i, PHOTON_EV), 180e-15);
        let s = analytic_single_channel(CrossSection::from_value(1e-51).unwrap(), &gaussian_envelope(&env)?, 2);
        let mut y = [0.0; NUM_SPECIES];
        y[0] = s;
        y[1] = 1.0 - s;
        Ok(y)
    })
    .unwrap();
    let a = volume_average(&integrated, &m, 1e16).unwrap();
    let b = volume_average(&analytic, &m, 1e16).unwrap();
    assert!(((a.yields[1] - b.yields[1]) / b.yields[1]).abs() < 1e-7);
}
