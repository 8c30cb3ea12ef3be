use crate::constants::{
    ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, JOULE_PER_EV, PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};

/// Ratio `U_p / photon energy` below which the quiver energy counts as
/// negligible.
pub const MAX_PONDEROMOTIVE_RATIO: f64 = 0.5;
/// Minimum number of optical cycles for a generalized cross section to make
/// sense.
pub const MIN_FIELD_CYCLES: f64 = 10.0;

/// Applicability of lowest-order perturbation theory for given field
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub ponderomotive_ev: f64,
    pub ponderomotive_ratio: f64,
    pub field_cycles: f64,
    pub ponderomotive_ok: bool,
    pub cycles_ok: bool,
}

impl ValidityReport {
    pub fn ok(&self) -> bool {
        self.ponderomotive_ok && self.cycles_ok
    }
}

/// Cycle-averaged quiver energy `e^2 E^2 / (4 m w^2)` of a free electron,
/// in eV, for intensity in W/cm² and photon energy in eV.
pub fn ponderomotive_energy_ev(photon_energy_ev: f64, intensity_w_cm2: f64) -> f64 {
    let intensity_si = intensity_w_cm2 * 1e4;
    let field_sq = 2.0 * intensity_si / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY);
    let omega = photon_energy_ev * JOULE_PER_EV / HBAR;
    let up_joule = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * field_sq / (4.0 * ELECTRON_MASS * omega * omega);
    up_joule / JOULE_PER_EV
}

pub fn check_lopt_validity(photon_energy_ev: f64, peak_intensity_w_cm2: f64, pulse_duration_s: f64) -> ValidityReport {
    let up = ponderomotive_energy_ev(photon_energy_ev, peak_intensity_w_cm2.max(0.0));
    let period = PLANCK / (photon_energy_ev * JOULE_PER_EV);
    let cycles = pulse_duration_s / period;
    let ratio = up / photon_energy_ev;
    ValidityReport {
        ponderomotive_ev: up,
        ponderomotive_ratio: ratio,
        field_cycles: cycles,
        ponderomotive_ok: ratio < MAX_PONDEROMOTIVE_RATIO,
        cycles_ok: cycles >= MIN_FIELD_CYCLES,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ponderomotive_at_1e18() {
        // Rule of thumb U_p[eV] = 9.337e-14 I[W/cm2] lambda[um]^2.
        let lambda_um = 1.239_841_98 / 93.0;
        let thumb = 9.337e-14 * 1e18 * lambda_um * lambda_um;
        let r = check_lopt_validity(93.0, 1e18, 30e-15);
        assert!((r.ponderomotive_ev / thumb - 1.0).abs() < 1e-3, "{}", r.ponderomotive_ev);
        assert!(r.ponderomotive_ev > 10.0 && r.ponderomotive_ev < 20.0);
        assert!(r.ponderomotive_ok);
    }

    #[test]
    fn one_femtosecond_has_22_cycles() {
        let r = check_lopt_validity(93.0, 1e15, 1e-15);
        assert!((r.field_cycles - 22.49).abs() < 0.01, "{}", r.field_cycles);
        assert!(r.cycles_ok);
        let short = check_lopt_validity(93.0, 1e15, 0.3e-15);
        assert!(!short.cycles_ok);
    }

    #[test]
    fn weak_field_limit() {
        let r = check_lopt_validity(93.0, 1e-30, 30e-15);
        assert!(r.ponderomotive_ev < 1e-40);
        assert!(r.ok());
        let strong = check_lopt_validity(1.55, 1e15, 30e-15);
        assert!(!strong.ponderomotive_ok);
    }
}
