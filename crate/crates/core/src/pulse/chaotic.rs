use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::pulse::{DeterministicPulseSpec, PulseRecord};
use crate::rng::stream_rng;

pub const MIN_OVERSAMPLE: u32 = 16;
pub const DEFAULT_OVERSAMPLE: u32 = 32;

/// Chaotic (SASE-like) pulse: a Gaussian envelope modulated by the squared
/// modulus of a stationary circular complex Gaussian process with
/// `|g1(tau)| = exp(-tau^2 / (2 tau_c^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaoticPulseSpec {
    pub envelope: DeterministicPulseSpec,
    /// Field coherence time, s.
    pub coherence_time: f64,
    pub seed: u64,
    /// Samples per coherence time (or per FWHM if shorter).
    pub oversample: u32,
}

impl ChaoticPulseSpec {
    pub fn new(envelope: DeterministicPulseSpec, coherence_time: f64, seed: u64) -> Self {
        Self {
            envelope,
            coherence_time,
            seed,
            oversample: DEFAULT_OVERSAMPLE,
        }
    }

    /// Checks the synthesis parameters. `coherence_time` may exceed the FWHM
    /// here (single-mode limit); configuration front ends enforce the
    /// physical bound separately.
    pub fn validate(&self) -> Result<()> {
        self.envelope.validate()?;
        if !(self.coherence_time > 0.0 && self.coherence_time.is_finite()) {
            return Err(Error::Config(format!(
                "coherence time must be positive, got {}",
                self.coherence_time
            )));
        }
        if self.oversample < MIN_OVERSAMPLE {
            return Err(Error::Config(format!(
                "oversample {} below minimum {MIN_OVERSAMPLE}",
                self.oversample
            )));
        }
        Ok(())
    }

    /// Grid spacing: the shorter of coherence time and FWHM, divided by the
    /// oversampling factor.
    pub fn dt(&self) -> f64 {
        self.coherence_time.min(self.envelope.fwhm) / self.oversample as f64
    }

    /// Power-of-two sample count covering the window.
    pub fn samples(&self) -> usize {
        let need = (self.envelope.window / self.dt()).ceil() as usize + 1;
        need.next_power_of_two().max(super::MIN_SAMPLES)
    }
}

/// Reusable synthesizer: FFT plan, spectral filter and envelope are computed
/// once and shared by all realizations of one spec.
pub struct ChaoticPulseGenerator {
    spec: ChaoticPulseSpec,
    t0: f64,
    dt: f64,
    envelope: Vec<f64>,
    filter: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChaoticPulseGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChaoticPulseGenerator")
            .field("spec", &self.spec)
            .field("samples", &self.envelope.len())
            .finish()
    }
}

impl ChaoticPulseGenerator {
    pub fn new(spec: &ChaoticPulseSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.samples();
        let dt = spec.dt();
        let t0 = -((n / 2) as f64) * dt;
        let envelope: Vec<f64> = (0..n).map(|i| spec.envelope.shape(t0 + i as f64 * dt)).collect();
        // Amplitude filter sqrt(S(w)) for S(w) ~ exp(-w^2 tau_c^2 / 2),
        // normalized so that <|a|^2> = 1.
        let tc = spec.coherence_time;
        let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
        let mut filter: Vec<f64> = (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let w = kk * dw;
                (-0.25 * w * w * tc * tc).exp()
            })
            .collect();
        let power: f64 = filter.iter().map(|h| h * h).sum();
        let norm = power.sqrt();
        filter.iter_mut().for_each(|h| *h /= norm);
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Ok(Self {
            spec: *spec,
            t0,
            dt,
            envelope,
            filter,
            fft,
        })
    }

    pub fn spec(&self) -> &ChaoticPulseSpec {
        &self.spec
    }

    pub fn samples(&self) -> usize {
        self.envelope.len()
    }

    /// The smooth mean flux on the synthesis grid.
    pub fn envelope_record(&self) -> PulseRecord {
        PulseRecord::new(self.t0, self.dt, self.envelope.clone()).expect("valid envelope")
    }

    /// Unit-mean-square complex amplitude `a(t)` for one realization.
    pub fn amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = self
            .filter
            .iter()
            .map(|h| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re, im) * (h * std::f64::consts::FRAC_1_SQRT_2)
            })
            .collect();
        self.fft.process(&mut buf);
        buf
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> PulseRecord {
        let a = self.amplitude(rng);
        let flux = self
            .envelope
            .iter()
            .zip(&a)
            .map(|(e, z)| e * z.norm_sqr())
            .collect();
        PulseRecord::new(self.t0, self.dt, flux).expect("nonnegative by construction")
    }
}

/// One realization from the spec's own seed (stream 0).
pub fn sample_chaotic_pulse(spec: &ChaoticPulseSpec) -> Result<PulseRecord> {
    let generator = ChaoticPulseGenerator::new(spec)?;
    Ok(generator.generate(&mut stream_rng(spec.seed, 0, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(tc: f64, seed: u64) -> ChaoticPulseSpec {
        ChaoticPulseSpec::new(DeterministicPulseSpec::new(30e-15, 1e32, 180e-15), tc, seed)
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = sample_chaotic_pulse(&spec(6e-15, 11)).unwrap();
        let b = sample_chaotic_pulse(&spec(6e-15, 11)).unwrap();
        assert_eq!(a, b);
        let c = sample_chaotic_pulse(&spec(6e-15, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn grid_is_power_of_two_and_centered() {
        let s = spec(6e-15, 1);
        let r = sample_chaotic_pulse(&s).unwrap();
        assert!(r.len().is_power_of_two());
        assert!(r.len() as f64 * r.dt() >= s.envelope.window);
        assert_eq!(r.time(r.center_index()), 0.0);
        assert!((r.dt() - 6e-15 / 32.0).abs() < 1e-30);
        assert!(r.flux().iter().all(|f| *f >= 0.0));
    }

    #[test]
    fn rejects_low_oversampling() {
        let mut s = spec(6e-15, 1);
        s.oversample = 8;
        assert!(matches!(sample_chaotic_pulse(&s), Err(Error::Config(_))));
        s.oversample = 32;
        s.coherence_time = 0.0;
        assert!(sample_chaotic_pulse(&s).is_err());
    }

    #[test]
    fn ensemble_mean_tracks_envelope() {
        let s = spec(6e-15, 5);
        let g = ChaoticPulseGenerator::new(&s).unwrap();
        let n = 4000;
        let mut acc = vec![0.0; g.samples()];
        let mut acc2 = vec![0.0; g.samples()];
        for i in 0..n {
            let r = g.generate(&mut stream_rng(5, 0, i));
            for (k, f) in r.flux().iter().enumerate() {
                acc[k] += f;
                acc2[k] += f * f;
            }
        }
        let env = g.envelope_record();
        for k in [g.samples() / 2, g.samples() / 2 + 40, g.samples() / 2 - 100] {
            let mean = acc[k] / n as f64;
            let var = acc2[k] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - env.flux()[k]).abs() < 4.0 * se, "k={k} mean={mean:e} env={:e}", env.flux()[k]);
        }
    }

    #[test]
    fn single_mode_limit_is_exponential_times_envelope() {
        // tau_c much longer than the window: one spectral mode survives, so
        // every record is the envelope times one Exp(1)-distributed factor.
        let mut s = spec(6e-12, 3);
        s.envelope.window = 180e-15;
        let g = ChaoticPulseGenerator::new(&s).unwrap();
        let env = g.envelope_record();
        let n = 20_000;
        let mut xs = Vec::with_capacity(n);
        for i in 0..n {
            let r = g.generate(&mut stream_rng(3, 0, i as u64));
            let c = r.center_index();
            let x = r.flux()[c] / env.flux()[c];
            let off = c + 100;
            assert!((r.flux()[off] / env.flux()[off] / x - 1.0).abs() < 1e-6);
            xs.push(x);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let frac_above_1 = xs.iter().filter(|x| **x > 1.0).count() as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
        // P(X > 1) = 1/e for the unit exponential.
        assert!((frac_above_1 - (-1.0f64).exp()).abs() < 0.015, "{frac_above_1}");
    }
}
