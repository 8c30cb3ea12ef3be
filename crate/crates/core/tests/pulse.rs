use ionkin_core::pulse::{
    correlation_diagnostic, field_correlation_profile, sample_chaotic_pulse, ChaoticPulseGenerator,
    ChaoticPulseSpec, DeterministicPulseSpec, PulseRecord,
};
use ionkin_core::rng::stream_rng;

fn records(n: usize, tc: f64, seed: u64) -> Vec<PulseRecord> {
    let spec = ChaoticPulseSpec::new(DeterministicPulseSpec::new(30e-15, 1e31, 180e-15), tc, seed);
    let g = ChaoticPulseGenerator::new(&spec).unwrap();
    (0..n as u64).map(|i| g.generate(&mut stream_rng(seed, 0, i))).collect()
}

#[test]
fn center_moments_follow_factorials() {
    let recs = records(4000, 6e-15, 21);
    let g2 = correlation_diagnostic(&recs, 2).unwrap();
    let g3 = correlation_diagnostic(&recs, 3).unwrap();
    assert!((g2.value - 2.0).abs() < 4.0 * g2.stderr, "{g2:?}");
    assert!((g3.value - 6.0).abs() < 4.0 * g3.stderr, "{g3:?}");
    assert!(g2.stderr > 0.0 && g2.stderr < 0.1);
}

#[test]
fn field_coherence_width_matches_spec() {
    let tc = 6e-15;
    let recs = records(600, tc, 4);
    let dt = recs[0].dt();
    let prof = field_correlation_profile(&recs, (3.0 * tc / dt) as usize).unwrap();
    assert!((prof.g2[0] - 2.0).abs() < 0.1, "{}", prof.g2[0]);
    let expect = 2f64.sqrt() * tc;
    assert!((prof.half_width_1e / expect - 1.0).abs() < 0.1, "{:e} vs {expect:e}", prof.half_width_1e);
}

#[test]
fn seeds_are_reproducible() {
    let spec = ChaoticPulseSpec::new(DeterministicPulseSpec::new(5e-15, 1e31, 40e-15), 1e-15, 99);
    assert_eq!(sample_chaotic_pulse(&spec).unwrap(), sample_chaotic_pulse(&spec).unwrap());
}
