//! Ion histograms at fixed intensity and comparison with measured heights.

use std::fmt::Write as _;

use ionkin_core::kinetics::ChannelMode;
use ionkin_core::model::SpeciesIndex;
use ionkin_core::volume::YieldCurve;

use crate::config::Normalization;
use crate::error::{CliError, Context, Result};
use crate::io::{ExperimentHistogram, Histogram, NUM_IONS};
use crate::scan::ScanCurve;

fn ions_at(curve: &ScanCurve, intensity: f64) -> Result<[f64; NUM_IONS]> {
    let yc = YieldCurve::new(curve.intensities.clone(), curve.mean.clone())?;
    let y = yc.eval(intensity).context(|| "histogram".into())?;
    let mut out = [0.0; NUM_IONS];
    out.copy_from_slice(&y[1..]);
    Ok(out)
}

/// Interpolates each curve at `intensity` and scales both columns by one
/// common factor, so the two channel modes stay directly comparable.
pub fn emit_histogram(
    curves: &[(ChannelMode, &ScanCurve)],
    intensity: f64,
    normalization: Normalization,
) -> Result<Histogram> {
    let mut h = Histogram {
        seq_only: None,
        seq_plus_direct: None,
    };
    for (mode, c) in curves {
        let col = ions_at(c, intensity)?;
        match mode {
            ChannelMode::SequentialOnly => h.seq_only = Some(col),
            ChannelMode::SequentialPlusDirect => h.seq_plus_direct = Some(col),
        }
    }
    let primary = *h
        .primary()
        .ok_or_else(|| CliError::Input("histogram needs at least one curve".into()))?;
    let reference = match normalization {
        Normalization::MaxPeak => [h.seq_only, h.seq_plus_direct]
            .iter()
            .flatten()
            .flat_map(|c| c.iter().copied())
            .fold(0.0, f64::max),
        Normalization::Species(s) => primary[s.get() - 1],
    };
    if !(reference > 0.0) {
        return Err(CliError::Numerical(format!(
            "histogram reference height at {intensity:e} W/cm2 is {reference:e}"
        )));
    }
    for c in [&mut h.seq_only, &mut h.seq_plus_direct]
        .into_iter()
        .flatten()
    {
        for v in c.iter_mut() {
            *v /= reference;
        }
    }
    if let Normalization::Species(s) = normalization {
        // Division can leave the reference one ulp off.
        if let Some(c) = h.seq_plus_direct.as_mut().or(h.seq_only.as_mut()) {
            c[s.get() - 1] = 1.0;
        }
    } else {
        for c in [&mut h.seq_only, &mut h.seq_plus_direct]
            .into_iter()
            .flatten()
        {
            for v in c.iter_mut() {
                if *v > 1.0 - 4.0 * f64::EPSILON {
                    *v = 1.0;
                }
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub species: SpeciesIndex,
    pub model: f64,
    pub experiment: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Species both histograms are scaled to.
    pub reference: SpeciesIndex,
    pub rows: Vec<ComparisonRow>,
    /// Root mean square of `ln(model / experiment)`.
    pub log_rms: f64,
    /// Species with zero measured height, left out of the metric.
    pub skipped: Vec<SpeciesIndex>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("species,model,experiment,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.species.label(),
                crate::io::fmt_f64(r.model),
                crate::io::fmt_f64(r.experiment),
                crate::io::fmt_f64(r.ratio)
            );
        }
        s
    }
}

/// Rescales the model column to 1 at the experiment's reference species and
/// lists per-species ratios. Uses the sequential+direct column when present.
pub fn compare_experiment(hist: &Histogram, exp: &ExperimentHistogram) -> Result<Comparison> {
    let model = hist
        .primary()
        .ok_or_else(|| CliError::Input("model histogram is empty".into()))?;
    let reference = exp.reference();
    let scale = model[reference.get() - 1];
    if !(scale > 0.0) {
        return Err(CliError::Input(format!(
            "model height of the reference species {} is zero",
            reference.label()
        )));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &(sp, e) in &exp.heights {
        if e == 0.0 {
            skipped.push(sp);
            continue;
        }
        let m = model[sp.get() - 1] / scale;
        rows.push(ComparisonRow {
            species: sp,
            model: m,
            experiment: e,
            ratio: m / e,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Input(
            "model and experiment share no species".into(),
        ));
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let log_rms = if logs.iter().all(|l| l.is_finite()) {
        (logs.iter().map(|l| l * l).sum::<f64>() / logs.len() as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(Comparison {
        reference,
        rows,
        log_rms,
        skipped,
    })
}
