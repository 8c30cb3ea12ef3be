//! Intensity scans.

use ionkin_core::ensemble::{run_decorrelated, run_ensemble, EnsembleSpec};
use ionkin_core::kinetics::{ChannelMode, IntegrationStats, Kinetics, PopulationVector};
use ionkin_core::model::{ChannelTable, NUM_SPECIES};
use ionkin_core::pulse::{gaussian_envelope, intensity_to_flux};
use ionkin_core::volume::{log_grid, volume_average, VolumeKind, VolumeModel, YieldCurve};
use rayon::prelude::*;

use crate::config::{Config, PulseKind, StochasticMethod};
use crate::error::{CliError, Context, Result};

/// Tolerated deviation of a point-yield column sum from 1.
pub const POINT_SUM_TOL: f64 = 1e-6;
/// Same after volume averaging.
pub const VOLUME_SUM_TOL: f64 = 1e-4;

type Row = [f64; NUM_SPECIES];

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub intensities: Vec<f64>,
    pub pulse_kind: PulseKind,
    pub channel_mode: ChannelMode,
    pub method: Option<StochasticMethod>,
    pub volume: VolumeModel,
}

impl ScanSpec {
    pub fn from_config(cfg: &Config, mode: ChannelMode) -> Result<Self> {
        let intensities = log_grid(cfg.scan.i_min, cfg.scan.i_max, cfg.scan.points_per_decade)
            .map_err(|e| CliError::Config(format!("scan grid: {e}")))?;
        let spec = Self {
            intensities,
            pulse_kind: cfg.pulse.kind,
            channel_mode: mode,
            method: cfg.method(),
            volume: cfg.volume_model()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.intensities.len() < 2 {
            return Err(CliError::Config(
                "a scan needs at least two intensities".into(),
            ));
        }
        if self.intensities.windows(2).any(|w| !(w[1] > w[0])) || !(self.intensities[0] > 0.0) {
            return Err(CliError::Config(
                "scan intensities must be positive and strictly increasing".into(),
            ));
        }
        match (self.pulse_kind, self.method) {
            (PulseKind::Deterministic, None) | (PulseKind::Chaotic, Some(_)) => Ok(()),
            (PulseKind::Deterministic, Some(_)) => Err(CliError::Config(
                "a stochastic method needs a chaotic pulse".into(),
            )),
            (PulseKind::Chaotic, None) => Err(CliError::Config(
                "a chaotic pulse needs a stochastic method".into(),
            )),
        }
    }
}

/// Mean yields per intensity, with standard errors for ensemble runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCurve {
    pub intensities: Vec<f64>,
    pub mean: Vec<Row>,
    pub stderr: Option<Vec<Row>>,
}

/// Aggregated run diagnostics, all deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanDiagnostics {
    /// Intensities integrated (the fine grid when volume averaging).
    pub points: usize,
    pub stats: IntegrationStats,
    /// `(point index, intensity, failed realization indices)`.
    pub failures: Vec<(usize, f64, Vec<u64>)>,
    pub max_point_sum_error: f64,
    pub max_volume_sum_error: f64,
    pub max_volume_error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub spec: ScanSpec,
    pub curve: ScanCurve,
    pub diagnostics: ScanDiagnostics,
}

fn merge_stats(acc: &mut IntegrationStats, s: &IntegrationStats) {
    acc.accepted += s.accepted;
    acc.rejected += s.rejected;
    acc.implicit_steps += s.implicit_steps;
    acc.rhs_evals += s.rhs_evals;
    acc.max_conservation_error = acc.max_conservation_error.max(s.max_conservation_error);
    acc.min_population = acc.min_population.min(s.min_population);
}

fn sum_error(r: &Row) -> f64 {
    (r.iter().sum::<f64>() - 1.0).abs()
}

fn point_context(k: usize, i: f64) -> impl FnOnce() -> String {
    move || format!("intensity point {k} ({i:.6e} W/cm2)")
}

/// Yields at each intensity of `grid`, without volume averaging.
pub fn point_yields(
    spec: &ScanSpec,
    cfg: &Config,
    table: &ChannelTable,
    grid: &[f64],
) -> Result<(ScanCurve, ScanDiagnostics)> {
    let opts = cfg.kinetics_options(spec.channel_mode);
    let ev = cfg.atom.photon_energy_ev;
    let mut diag = ScanDiagnostics {
        points: grid.len(),
        ..Default::default()
    };
    let mut mean = Vec::with_capacity(grid.len());
    let mut stderr = None;
    match spec.method {
        None | Some(StochasticMethod::Decorrelated) => {
            let decorrelated = spec.method.is_some();
            let kin = Kinetics::new(table, &opts).context(|| "kinetics setup".into())?;
            let runs: Vec<_> = grid
                .par_iter()
                .enumerate()
                .map(|(k, &i)| {
                    let env = cfg.envelope(intensity_to_flux(i, ev));
                    let out = if decorrelated {
                        run_decorrelated(&env, table, &opts)
                    } else {
                        gaussian_envelope(&env)
                            .and_then(|rec| kin.integrate(&PopulationVector::neutral(), &rec))
                    };
                    out.context(point_context(k, i))
                })
                .collect();
            for r in runs {
                let o = r?;
                merge_stats(&mut diag.stats, &o.stats);
                mean.push(*o.populations.as_array());
            }
        }
        Some(StochasticMethod::Ensemble) => {
            let mut errs = Vec::with_capacity(grid.len());
            for (k, &i) in grid.iter().enumerate() {
                let pulse = cfg
                    .chaotic(intensity_to_flux(i, ev))
                    .ok_or_else(|| CliError::Config("ensemble runs need a chaotic pulse".into()))?;
                let mut es =
                    EnsembleSpec::new(pulse, table.clone(), opts, cfg.ensemble.master_seed);
                es.n_realizations = cfg.ensemble.n_realizations;
                es.substream = k as u64;
                let st = run_ensemble(&es).context(point_context(k, i))?;
                if !st.failed.is_empty() {
                    diag.failures.push((k, i, st.failed.clone()));
                }
                mean.push(st.mean);
                errs.push(st.stderr);
            }
            stderr = Some(errs);
        }
    }
    for (k, row) in mean.iter().enumerate() {
        let e = sum_error(row);
        diag.max_point_sum_error = diag.max_point_sum_error.max(e);
        if !(e <= POINT_SUM_TOL) {
            return Err(CliError::Numerical(format!(
                "intensity point {k}: yields sum to 1 only within {e:e}"
            )));
        }
    }
    let curve = ScanCurve {
        intensities: grid.to_vec(),
        mean,
        stderr,
    };
    Ok((curve, diag))
}

/// Runs one scan: point yields on the needed grid, then volume averaging at
/// each scan intensity. Standard errors are averaged the same way, which
/// bounds the error of the averaged mean from above.
pub fn run_scan(spec: &ScanSpec, cfg: &Config) -> Result<ScanOutput> {
    spec.validate()?;
    let table = cfg.channel_table()?;
    if spec.volume.kind == VolumeKind::None {
        let (curve, diagnostics) = point_yields(spec, cfg, &table, &spec.intensities)?;
        return Ok(ScanOutput {
            spec: spec.clone(),
            curve,
            diagnostics,
        });
    }
    let hi = *spec.intensities.last().expect("validated");
    let lo = spec.intensities[0] * spec.volume.fmin;
    let fine = log_grid(lo, hi, cfg.volume.points_per_decade)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (point, mut diagnostics) = point_yields(spec, cfg, &table, &fine)?;
    let mean_curve = YieldCurve::new(point.intensities.clone(), point.mean.clone())?;
    let err_curve = match &point.stderr {
        Some(e) => Some(YieldCurve::new(point.intensities.clone(), e.clone())?),
        None => None,
    };
    let mut mean = Vec::with_capacity(spec.intensities.len());
    let mut stderr = err_curve
        .as_ref()
        .map(|_| Vec::with_capacity(spec.intensities.len()));
    for (k, &i0) in spec.intensities.iter().enumerate() {
        let a = volume_average(&mean_curve, &spec.volume, i0)
            .context(|| format!("volume average at scan point {k}"))?;
        let e = sum_error(&a.yields);
        diagnostics.max_volume_sum_error = diagnostics.max_volume_sum_error.max(e);
        diagnostics.max_volume_error_estimate =
            diagnostics.max_volume_error_estimate.max(a.error_estimate);
        if !(e <= VOLUME_SUM_TOL) {
            return Err(CliError::Numerical(format!(
                "scan point {k}: volume-averaged yields sum to 1 only within {e:e}"
            )));
        }
        mean.push(a.yields);
        if let (Some(c), Some(out)) = (&err_curve, stderr.as_mut()) {
            let s = volume_average(c, &spec.volume, i0)
                .context(|| format!("volume average at scan point {k}"))?;
            out.push(s.yields.map(|v| v.max(0.0)));
        }
    }
    Ok(ScanOutput {
        spec: spec.clone(),
        curve: ScanCurve {
            intensities: spec.intensities.clone(),
            mean,
            stderr,
        },
        diagnostics,
    })
}
