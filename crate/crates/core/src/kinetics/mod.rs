//! Population rate equations over a pulse record.

mod oracle;
mod rates;
mod solver;

pub use oracle::{analytic_single_channel, ln_flux_power_integral};

use crate::error::{Error, Result};
use crate::model::{ChannelTable, NUM_SPECIES};
use crate::pulse::PulseRecord;
use rates::RateModel;
use solver::Solver;

/// Most rows kept in a recorded trajectory.
pub const MAX_TRAJECTORY_ROWS: usize = 4096;

/// Which channels of a table take part in the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelMode {
    SequentialOnly,
    #[default]
    SequentialPlusDirect,
}

impl ChannelMode {
    pub fn name(self) -> &'static str {
        match self {
            ChannelMode::SequentialOnly => "sequential_only",
            ChannelMode::SequentialPlusDirect => "sequential_plus_direct",
        }
    }
}

/// Fractional populations of `Ne`, `Ne+`, ... `Ne8+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationVector([f64; NUM_SPECIES]);

impl PopulationVector {
    pub const ENTRY_TOL: f64 = 1e-12;
    pub const SUM_TOL: f64 = 1e-9;

    /// Checks entries lie in `[0, 1]` and sum to 1.
    pub fn new(n: [f64; NUM_SPECIES]) -> Result<Self> {
        if let Some((j, v)) = n
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= -Self::ENTRY_TOL && **v <= 1.0 + Self::ENTRY_TOL))
        {
            return Err(Error::Domain(format!("population N{j} = {v} outside [0, 1]")));
        }
        let sum: f64 = n.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::Domain(format!("populations sum to {sum}, expected 1")));
        }
        Ok(Self(n))
    }

    /// Everything in the neutral.
    pub fn neutral() -> Self {
        let mut n = [0.0; NUM_SPECIES];
        n[0] = 1.0;
        Self(n)
    }

    pub(crate) fn from_raw(n: [f64; NUM_SPECIES]) -> Self {
        Self(n)
    }

    pub fn as_array(&self) -> &[f64; NUM_SPECIES] {
        &self.0
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Copy with tiny negative entries replaced by zero, for reporting.
    pub fn clipped(&self) -> [f64; NUM_SPECIES] {
        self.0.map(|v| v.max(0.0))
    }
}

impl Default for PopulationVector {
    fn default() -> Self {
        Self::neutral()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticsOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step, s. Steps are also limited to a few grid
    /// intervals of the record so no flux feature is skipped.
    pub max_step: f64,
    pub channel_mode: ChannelMode,
    pub record_trajectory: bool,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: u64,
}

impl Default for KineticsOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_step: f64::INFINITY,
            channel_mode: ChannelMode::SequentialPlusDirect,
            record_trajectory: false,
            max_steps: 5_000_000,
        }
    }
}

impl KineticsOptions {
    pub fn with_mode(mode: ChannelMode) -> Self {
        Self {
            channel_mode: mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("rel_tol must be in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(Error::Config(format!("abs_tol must be in (0, 1), got {}", self.abs_tol)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Config(format!("max_step must be positive, got {}", self.max_step)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Step counters and monitored invariants of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationStats {
    pub accepted: u64,
    pub rejected: u64,
    /// Accepted steps taken by the implicit stepper.
    pub implicit_steps: u64,
    pub rhs_evals: u64,
    /// Largest `|sum N - sum N(start)|` over accepted steps.
    pub max_conservation_error: f64,
    /// Smallest population seen at any accepted step.
    pub min_population: f64,
}

impl Default for IntegrationStats {
    fn default() -> Self {
        Self {
            accepted: 0,
            rejected: 0,
            implicit_steps: 0,
            rhs_evals: 0,
            max_conservation_error: 0.0,
            min_population: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub populations: [f64; NUM_SPECIES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOutcome {
    pub populations: PopulationVector,
    pub stats: IntegrationStats,
    /// Accepted steps, decimated to at most [`MAX_TRAJECTORY_ROWS`] rows.
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// `dN/dt` at one instant.
pub fn rate_rhs(
    pop: &PopulationVector,
    flux: f64,
    table: &ChannelTable,
    mode: ChannelMode,
) -> Result<[f64; NUM_SPECIES]> {
    if !(flux >= 0.0) || !flux.is_finite() {
        return Err(Error::Domain(format!("flux must be finite and >= 0, got {flux}")));
    }
    let model = RateModel::new(table, mode);
    let mut rates = vec![0.0; model.len()];
    model.rates(flux, &mut rates);
    let mut d = [0.0; NUM_SPECIES];
    model.derivative(&rates, pop.as_array(), &mut d);
    Ok(d)
}

/// Integrator bound to one channel table and option set, reusable across
/// many pulse records.
#[derive(Debug, Clone)]
pub struct Kinetics {
    model: RateModel,
    opts: KineticsOptions,
}

impl Kinetics {
    pub fn new(table: &ChannelTable, opts: &KineticsOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self {
            model: RateModel::new(table, opts.channel_mode),
            opts: *opts,
        })
    }

    pub fn options(&self) -> &KineticsOptions {
        &self.opts
    }

    pub fn integrate(&self, initial: &PopulationVector, pulse: &PulseRecord) -> Result<IntegrationOutcome> {
        let flux = pulse.interpolant();
        let mut solver = Solver::new(&self.model, &flux, &self.opts)?;
        let mut traj = self.opts.record_trajectory.then(Vec::new);
        let y = solver.run(pulse.t0(), pulse.t_end(), *initial.as_array(), traj.as_mut())?;
        Ok(IntegrationOutcome {
            populations: PopulationVector::from_raw(y),
            stats: solver.stats,
            trajectory: traj.map(|t| decimate(t, MAX_TRAJECTORY_ROWS)),
        })
    }
}

/// Integrates the rate equations from the start to the end of `pulse`.
pub fn integrate(
    initial: &PopulationVector,
    pulse: &PulseRecord,
    table: &ChannelTable,
    opts: &KineticsOptions,
) -> Result<IntegrationOutcome> {
    Kinetics::new(table, opts)?.integrate(initial, pulse)
}

/// Keeps at most `max_rows` evenly strided rows, always including the last.
pub fn decimate<T: Clone>(rows: Vec<T>, max_rows: usize) -> Vec<T> {
    if rows.len() <= max_rows || max_rows < 2 {
        return rows;
    }
    let n = rows.len();
    let stride = (n - 1).div_ceil(max_rows - 1);
    let mut out: Vec<T> = rows.iter().step_by(stride).cloned().collect();
    if !(n - 1).is_multiple_of(stride) {
        out.push(rows[n - 1].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_channel_table, CrossSection, CrossSectionConfig, IonizationPotentialTable};
    use crate::pulse::{gaussian_envelope, DeterministicPulseSpec};

    fn neon_table() -> ChannelTable {
        build_channel_table(93.0, &IonizationPotentialTable::neon(), &CrossSectionConfig::default()).unwrap()
    }

    #[test]
    fn rhs_zero_flux_and_first_channel() {
        let t = neon_table();
        let p = PopulationVector::neutral();
        let d = rate_rhs(&p, 0.0, &t, ChannelMode::SequentialPlusDirect).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
        let f = 1e30;
        let d = rate_rhs(&p, f, &t, ChannelMode::SequentialOnly).unwrap();
        assert!((d[0] / (-1e-18 * f) - 1.0).abs() < 1e-14);
        assert_eq!(d[1], -d[0]);
        assert!(d[2..].iter().all(|v| *v == 0.0));
        assert!(matches!(rate_rhs(&p, -1.0, &t, ChannelMode::SequentialOnly), Err(Error::Domain(_))));
    }

    #[test]
    fn rhs_direct_terms_from_neutral() {
        let t = neon_table();
        let f: f64 = 2e31;
        let d = rate_rhs(&PopulationVector::neutral(), f, &t, ChannelMode::SequentialPlusDirect).unwrap();
        for j in 1..NUM_SPECIES {
            let c = t.get(0, j).unwrap();
            let expect = (c.sigma.ln() + c.order as f64 * f.ln()).exp();
            assert!((d[j] / expect - 1.0).abs() < 1e-12, "j={j}");
        }
        let s: f64 = d.iter().sum();
        assert!(s.abs() <= 1e-15 * d[0].abs());
    }

    #[test]
    fn population_vector_invariants() {
        assert!(PopulationVector::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(PopulationVector::new([0.5, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(PopulationVector::new([1.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_flux_pulse_is_identity() {
        let rec = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 0.0, 180e-15)).unwrap();
        let p0 = PopulationVector::new([0.25, 0.25, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let out = integrate(&p0, &rec, &neon_table(), &KineticsOptions::default()).unwrap();
        assert_eq!(out.populations, p0);
    }

    #[test]
    fn single_photon_channel_matches_closed_form() {
        let mut t = neon_table();
        for c in t.channels().to_vec() {
            if (c.from.get(), c.to.get()) != (0, 1) {
                t.set_sigma(c.from.get(), c.to.get(), CrossSection::ZERO).unwrap();
            }
        }
        let spec = DeterministicPulseSpec::new(30e-15, 3e31, 240e-15);
        let rec = gaussian_envelope(&spec).unwrap();
        let out = integrate(&PopulationVector::neutral(), &rec, &t, &KineticsOptions::default()).unwrap();
        let exact = (-1e-18 * spec.fluence()).exp();
        assert!((out.populations.get(0) / exact - 1.0).abs() < 1e-6);
        let oracle = analytic_single_channel(CrossSection::from_value(1e-18).unwrap(), &rec, 1);
        assert!((out.populations.get(0) / oracle - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strong_field_ends_in_bare_ion() {
        let t = neon_table();
        let rec = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 1e37, 180e-15)).unwrap();
        let out = integrate(&PopulationVector::neutral(), &rec, &t, &KineticsOptions::default()).unwrap();
        assert!(out.populations.get(8) > 1.0 - 1e-9, "{:?}", out.populations);
        assert!(out.stats.implicit_steps > 0);
        assert!(out.stats.max_conservation_error < 1e-9);
    }

    #[test]
    fn trajectory_is_decimated() {
        let rec = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 3e32, 180e-15)).unwrap();
        let opts = KineticsOptions {
            record_trajectory: true,
            ..KineticsOptions::default()
        };
        let out = integrate(&PopulationVector::neutral(), &rec, &neon_table(), &opts).unwrap();
        let tr = out.trajectory.unwrap();
        assert!(tr.len() <= MAX_TRAJECTORY_ROWS && tr.len() > 10);
        assert_eq!(tr[0].t, rec.t0());
        assert_eq!(tr.last().unwrap().t, rec.t_end());
        assert_eq!(tr.last().unwrap().populations, *out.populations.as_array());
    }

    #[test]
    fn decimate_keeps_endpoints() {
        let v: Vec<usize> = (0..10_000).collect();
        let d = decimate(v, 4096);
        assert!(d.len() <= 4096);
        assert_eq!(d[0], 0);
        assert_eq!(*d.last().unwrap(), 9999);
        assert_eq!(decimate(vec![1, 2, 3], 4096), vec![1, 2, 3]);
    }
}
