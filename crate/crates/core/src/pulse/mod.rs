//! Photon-flux time series: deterministic Gaussian envelopes, chaotic
//! realizations, and statistical diagnostics.

mod chaotic;
mod diag;

pub use chaotic::{sample_chaotic_pulse, ChaoticPulseGenerator, ChaoticPulseSpec, DEFAULT_OVERSAMPLE, MIN_OVERSAMPLE};
pub use diag::{correlation_diagnostic, field_correlation_profile, CorrelationEstimate, FieldCorrelationProfile};

use crate::constants::{GAUSSIAN_AREA_PER_FWHM, JOULE_PER_EV};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Minimum number of samples in a [`PulseRecord`].
pub const MIN_SAMPLES: usize = 32;
/// Default deterministic grid density.
pub const DEFAULT_SAMPLES_PER_FWHM: u32 = 256;

/// Uniformly sampled photon flux (photons cm⁻² s⁻¹). Records produced by
/// this crate place the envelope maximum at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseRecord {
    t0: f64,
    dt: f64,
    flux: Vec<f64>,
}

impl PulseRecord {
    pub fn new(t0: f64, dt: f64, flux: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::Input(format!("pulse grid needs finite t0 and dt > 0, got t0={t0}, dt={dt}")));
        }
        if flux.len() < MIN_SAMPLES {
            return Err(Error::Input(format!(
                "pulse record needs at least {MIN_SAMPLES} samples, got {}",
                flux.len()
            )));
        }
        if let Some((i, v)) = flux.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Input(format!("flux sample {i} is {v}; flux must be finite and >= 0")));
        }
        Ok(Self { t0, dt, flux })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    pub fn len(&self) -> usize {
        self.flux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flux.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.flux.len() - 1)
    }

    /// Sample index nearest `t = 0`, clamped to the record.
    pub fn center_index(&self) -> usize {
        let i = (-self.t0 / self.dt).round();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.flux.len() - 1)
        }
    }

    pub fn same_grid(&self, other: &PulseRecord) -> bool {
        self.t0 == other.t0 && self.dt == other.dt && self.flux.len() == other.flux.len()
    }

    pub fn peak(&self) -> f64 {
        self.flux.iter().copied().fold(0.0, f64::max)
    }

    /// Continuous flux used by the kinetics: monotone cubic between samples.
    pub fn interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.t0, self.dt, self.flux.clone()).expect("validated record")
    }

    /// Time-integrated flux (photons cm⁻²) by the trapezoidal rule.
    pub fn fluence(&self) -> f64 {
        let n = self.flux.len();
        let inner: f64 = self.flux[1..n - 1].iter().sum();
        self.dt * (inner + 0.5 * (self.flux[0] + self.flux[n - 1]))
    }

    /// Same samples multiplied by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be finite and >= 0, got {factor}")));
        }
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            flux: self.flux.iter().map(|f| f * factor).collect(),
        })
    }
}

/// Deterministic Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicPulseSpec {
    /// Intensity FWHM, s.
    pub fwhm: f64,
    /// Peak photon flux, photons cm⁻² s⁻¹.
    pub peak_flux: f64,
    /// Total simulated span, s; at least four FWHM.
    pub window: f64,
    pub samples_per_fwhm: u32,
}

impl DeterministicPulseSpec {
    pub fn new(fwhm: f64, peak_flux: f64, window: f64) -> Self {
        Self {
            fwhm,
            peak_flux,
            window,
            samples_per_fwhm: DEFAULT_SAMPLES_PER_FWHM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(Error::Config(format!("pulse FWHM must be positive, got {}", self.fwhm)));
        }
        if !(self.peak_flux >= 0.0 && self.peak_flux.is_finite()) {
            return Err(Error::Config(format!("peak flux must be finite and >= 0, got {}", self.peak_flux)));
        }
        if !(self.window >= 4.0 * self.fwhm) || !self.window.is_finite() {
            return Err(Error::Config(format!(
                "window {} s is shorter than four FWHM ({} s)",
                self.window,
                4.0 * self.fwhm
            )));
        }
        if self.samples_per_fwhm < 8 {
            return Err(Error::Config("samples_per_fwhm must be at least 8".into()));
        }
        Ok(())
    }

    /// `peak_flux * exp(-4 ln2 t^2 / fwhm^2)`.
    #[inline]
    pub fn shape(&self, t: f64) -> f64 {
        let x = t / self.fwhm;
        self.peak_flux * (-4.0 * std::f64::consts::LN_2 * x * x).exp()
    }

    /// Closed-form fluence of the untruncated pulse.
    pub fn fluence(&self) -> f64 {
        self.peak_flux * self.fwhm * GAUSSIAN_AREA_PER_FWHM
    }

    pub fn with_peak_flux(&self, peak_flux: f64) -> Self {
        Self { peak_flux, ..*self }
    }
}

/// Samples the Gaussian on a symmetric grid with a node at the maximum.
pub fn gaussian_envelope(spec: &DeterministicPulseSpec) -> Result<PulseRecord> {
    spec.validate()?;
    let dt = spec.fwhm / spec.samples_per_fwhm as f64;
    let half = (0.5 * spec.window / dt).ceil() as usize;
    let n = 2 * half + 1;
    let t0 = -(half as f64) * dt;
    let flux = (0..n).map(|i| spec.shape(t0 + i as f64 * dt)).collect();
    PulseRecord::new(t0, dt, flux)
}

/// Photon flux (photons cm⁻² s⁻¹) for an intensity in W/cm².
pub fn intensity_to_flux(intensity_w_cm2: f64, photon_energy_ev: f64) -> f64 {
    intensity_w_cm2 / (photon_energy_ev * JOULE_PER_EV)
}

/// Inverse of [`intensity_to_flux`].
pub fn flux_to_intensity(flux: f64, photon_energy_ev: f64) -> f64 {
    flux * photon_energy_ev * JOULE_PER_EV
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec30() -> DeterministicPulseSpec {
        DeterministicPulseSpec::new(30e-15, 1e32, 240e-15)
    }

    #[test]
    fn envelope_peak_and_half_maximum() {
        let s = spec30();
        let r = gaussian_envelope(&s).unwrap();
        let c = r.center_index();
        assert_eq!(r.time(c), 0.0);
        assert_eq!(r.flux()[c], 1e32);
        let half = c + (s.samples_per_fwhm / 2) as usize;
        assert!((r.flux()[half] / 0.5e32 - 1.0).abs() < 1e-12);
        let m = r.interpolant();
        assert!((m.eval(-15e-15) / 0.5e32 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_fluence_matches_closed_form() {
        let s = spec30();
        let r = gaussian_envelope(&s).unwrap();
        let expect = 1e32 * 30e-15 * 1.064_467_019_431_226_2;
        assert!((r.fluence() / expect - 1.0).abs() < 1e-6);
        assert!((s.fluence() / expect - 1.0).abs() < 1e-15);
        let short = DeterministicPulseSpec::new(30e-15, 1e32, 120e-15);
        assert!((gaussian_envelope(&short).unwrap().fluence() / expect - 1.0).abs() < 1e-5);
    }

    #[test]
    fn envelope_rejects_short_windows() {
        let s = DeterministicPulseSpec::new(30e-15, 1e32, 100e-15);
        assert!(matches!(gaussian_envelope(&s), Err(Error::Config(_))));
        let neg = DeterministicPulseSpec::new(-1.0, 1e32, 100e-15);
        assert!(gaussian_envelope(&neg).is_err());
    }

    #[test]
    fn intensity_flux_conversion() {
        assert_eq!(intensity_to_flux(0.0, 93.0), 0.0);
        let one_photon = 93.0 * JOULE_PER_EV * 1e4 / 1e4;
        assert!((intensity_to_flux(one_photon, 93.0) - 1.0).abs() < 1e-15);
        assert!((intensity_to_flux(1.49e-17, 93.0) - 1.0).abs() < 0.01);
        let f = intensity_to_flux(3e15, 93.0);
        assert!((f / 2.013e32 - 1.0).abs() < 1e-3, "{f:e}");
        assert!((flux_to_intensity(f, 93.0) / 3e15 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn record_validation() {
        assert!(PulseRecord::new(0.0, 1.0, vec![0.0; 31]).is_err());
        assert!(PulseRecord::new(0.0, 0.0, vec![0.0; 40]).is_err());
        let mut v = vec![1.0; 40];
        v[3] = -1e-30;
        assert!(PulseRecord::new(0.0, 1.0, v).is_err());
        assert!(PulseRecord::new(0.0, 1.0, vec![f64::NAN; 40]).is_err());
    }
}
