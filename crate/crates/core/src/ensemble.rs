//! Monte Carlo averages over chaotic pulse realizations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinetics::{IntegrationOutcome, Kinetics, KineticsOptions, PopulationVector};
use crate::model::{ChannelTable, NUM_SPECIES};
use crate::pulse::{gaussian_envelope, ChaoticPulseGenerator, ChaoticPulseSpec, DeterministicPulseSpec};
use crate::quad::pairwise_sum;
use crate::rng::stream_rng;

pub const DEFAULT_REALIZATIONS: usize = 10_000;
/// Smallest chaotic ensemble accepted.
pub const MIN_CHAOTIC_REALIZATIONS: usize = 100;
/// Tolerated fraction of failed realizations.
pub const FAILURE_BUDGET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseSource {
    Chaotic(ChaoticPulseSpec),
    /// The smooth envelope; every realization is the same record.
    Deterministic(DeterministicPulseSpec),
}

impl From<ChaoticPulseSpec> for PulseSource {
    fn from(s: ChaoticPulseSpec) -> Self {
        PulseSource::Chaotic(s)
    }
}

impl From<DeterministicPulseSpec> for PulseSource {
    fn from(s: DeterministicPulseSpec) -> Self {
        PulseSource::Deterministic(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub pulse: PulseSource,
    pub table: ChannelTable,
    pub opts: KineticsOptions,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Separates independent ensembles sharing a master seed, e.g. the
    /// points of an intensity scan.
    pub substream: u64,
}

impl EnsembleSpec {
    pub fn new(pulse: impl Into<PulseSource>, table: ChannelTable, opts: KineticsOptions, master_seed: u64) -> Self {
        Self {
            pulse: pulse.into(),
            table,
            opts,
            n_realizations: DEFAULT_REALIZATIONS,
            master_seed,
            substream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.opts.validate()?;
        match &self.pulse {
            PulseSource::Chaotic(s) => {
                s.validate()?;
                if self.n_realizations < MIN_CHAOTIC_REALIZATIONS {
                    return Err(Error::Config(format!(
                        "chaotic ensembles need at least {MIN_CHAOTIC_REALIZATIONS} realizations, got {}",
                        self.n_realizations
                    )));
                }
            }
            PulseSource::Deterministic(s) => {
                s.validate()?;
                if self.n_realizations == 0 {
                    return Err(Error::Config("ensemble needs at least one realization".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: [f64; NUM_SPECIES],
    /// Standard error of the mean (sample standard deviation over `sqrt(n)`).
    pub stderr: [f64; NUM_SPECIES],
    /// Realizations that completed.
    pub n_effective: usize,
    /// Indices of realizations excluded after integration failures.
    pub failed: Vec<u64>,
}

impl EnsembleStats {
    /// `species,mean,stderr,n_effective` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("species,mean,stderr,n_effective\n");
        for j in 0..NUM_SPECIES {
            s.push_str(&format!(
                "{j},{:.16e},{:.16e},{}\n",
                self.mean[j], self.stderr[j], self.n_effective
            ));
        }
        s
    }

    /// Mean and stderr of a set of final populations, reduced in index order.
    pub fn from_samples(samples: &[[f64; NUM_SPECIES]]) -> Self {
        let n = samples.len();
        let mut mean = [0.0; NUM_SPECIES];
        let mut stderr = [0.0; NUM_SPECIES];
        for j in 0..NUM_SPECIES {
            let m = pairwise_sum(samples, |s| s[j]) / n as f64;
            mean[j] = m;
            if n > 1 {
                let ss = pairwise_sum(samples, |s| (s[j] - m) * (s[j] - m));
                stderr[j] = (ss / (n - 1) as f64 / n as f64).sqrt();
            }
        }
        Self {
            mean,
            stderr,
            n_effective: n,
            failed: Vec::new(),
        }
    }
}

fn is_integration_error(e: &Error) -> bool {
    matches!(e, Error::IntegrationFailure { .. } | Error::Integrity { .. })
}

/// Integrates `n_realizations` pulses drawn from streams
/// `(master_seed, substream, i)` and averages the final populations. The
/// result does not depend on the number of worker threads.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleStats> {
    spec.validate()?;
    let kin = Kinetics::new(&spec.table, &spec.opts)?;
    let initial = PopulationVector::neutral();
    let n = spec.n_realizations as u64;
    let results: Vec<Result<[f64; NUM_SPECIES]>> = match &spec.pulse {
        PulseSource::Chaotic(p) => {
            let generator = ChaoticPulseGenerator::new(p)?;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(spec.master_seed, spec.substream, i);
                    let rec = generator.generate(&mut rng);
                    kin.integrate(&initial, &rec).map(|o| *o.populations.as_array())
                })
                .collect()
        }
        PulseSource::Deterministic(p) => {
            let rec = gaussian_envelope(p)?;
            let out = kin.integrate(&initial, &rec).map(|o| *o.populations.as_array());
            vec![out; n as usize]
        }
    };
    let mut samples = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => samples.push(p),
            Err(e) if is_integration_error(&e) => failed.push(i as u64),
            Err(e) => return Err(e),
        }
    }
    if failed.len() as f64 > FAILURE_BUDGET * n as f64 || samples.is_empty() {
        return Err(Error::Ensemble {
            failed: failed.len(),
            total: n as usize,
            indices: failed.into_iter().take(32).collect(),
        });
    }
    let mut stats = EnsembleStats::from_samples(&samples);
    stats.failed = failed;
    Ok(stats)
}

/// Integrates the smooth envelope once with every cross section multiplied
/// by `order!`.
pub fn run_decorrelated(
    envelope: &DeterministicPulseSpec,
    table: &ChannelTable,
    opts: &KineticsOptions,
) -> Result<IntegrationOutcome> {
    let enhanced = table.apply_factorial_enhancement()?;
    let rec = gaussian_envelope(envelope)?;
    Kinetics::new(&enhanced, opts)?.integrate(&PopulationVector::neutral(), &rec)
}
