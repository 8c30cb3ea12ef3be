//! CSV formats: yield curves, histograms, experiment heights, trajectories.
//!
//! Floats are written with 17 significant digits so that files parse back
//! to identical values.

use std::fmt::Write as _;
use std::path::Path;

use ionkin_core::kinetics::TrajectoryPoint;
use ionkin_core::model::{SpeciesIndex, NUM_SPECIES};

use crate::error::{CliError, Result};
use crate::scan::ScanCurve;

/// Ions shown in histograms (`Ne+` to `Ne8+`).
pub const NUM_IONS: usize = NUM_SPECIES - 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn input(what: &str, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{what}, line {line}: {msg}"))
}

fn parse_f64(what: &str, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| input(what, line, format!("{field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(input(what, line, format!("{field:?} is not finite")));
    }
    Ok(v)
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn headers(what: &str, r: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    let h = r
        .headers()
        .map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    Ok(h.iter().map(str::to_string).collect())
}

pub fn yields_header(with_err: bool) -> Vec<String> {
    let mut h = vec!["intensity_W_cm2".to_string()];
    h.extend((0..NUM_SPECIES).map(|j| format!("N{j}_mean")));
    if with_err {
        h.extend((0..NUM_SPECIES).map(|j| format!("N{j}_err")));
    }
    h
}

pub fn format_yields(curve: &ScanCurve) -> String {
    let mut s = yields_header(curve.stderr.is_some()).join(",");
    s.push('\n');
    for (k, i) in curve.intensities.iter().enumerate() {
        s.push_str(&fmt_f64(*i));
        for v in &curve.mean[k] {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        if let Some(e) = &curve.stderr {
            for v in &e[k] {
                s.push(',');
                s.push_str(&fmt_f64(*v));
            }
        }
        s.push('\n');
    }
    s
}

pub fn parse_yields(text: &str) -> Result<ScanCurve> {
    const WHAT: &str = "yields CSV";
    let mut r = reader(text);
    let h = headers(WHAT, &mut r)?;
    let with_err = if h == yields_header(false) {
        false
    } else if h == yields_header(true) {
        true
    } else {
        return Err(CliError::Input(format!(
            "{WHAT}: unexpected header {:?}",
            h.join(",")
        )));
    };
    let mut curve = ScanCurve {
        intensities: Vec::new(),
        mean: Vec::new(),
        stderr: with_err.then(Vec::new),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{WHAT}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let vals = rec
            .iter()
            .map(|f| parse_f64(WHAT, line, f))
            .collect::<Result<Vec<f64>>>()?;
        if !(vals[0] > 0.0) {
            return Err(input(WHAT, line, "intensity must be positive"));
        }
        if curve.intensities.last().is_some_and(|p| !(vals[0] > *p)) {
            return Err(input(WHAT, line, "intensities must increase"));
        }
        curve.intensities.push(vals[0]);
        let mut m = [0.0; NUM_SPECIES];
        m.copy_from_slice(&vals[1..=NUM_SPECIES]);
        curve.mean.push(m);
        if let Some(e) = curve.stderr.as_mut() {
            let mut row = [0.0; NUM_SPECIES];
            row.copy_from_slice(&vals[1 + NUM_SPECIES..]);
            e.push(row);
        }
    }
    if curve.intensities.is_empty() {
        return Err(CliError::Input(format!("{WHAT}: no data rows")));
    }
    Ok(curve)
}

/// Relative ion heights for both channel modes at one intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub seq_only: Option<[f64; NUM_IONS]>,
    pub seq_plus_direct: Option<[f64; NUM_IONS]>,
}

impl Histogram {
    /// The column used for comparisons: sequential+direct when present.
    pub fn primary(&self) -> Option<&[f64; NUM_IONS]> {
        self.seq_plus_direct.as_ref().or(self.seq_only.as_ref())
    }
}

const HIST_HEADER: [&str; 3] = ["species", "seq_only", "seq_plus_direct"];

pub fn format_histogram(h: &Histogram) -> String {
    let mut s = HIST_HEADER.join(",");
    s.push('\n');
    let cell = |c: &Option<[f64; NUM_IONS]>, k: usize| c.map(|v| fmt_f64(v[k])).unwrap_or_default();
    for k in 0..NUM_IONS {
        let label = SpeciesIndex::new(k + 1).expect("ion index").label();
        let _ = writeln!(
            s,
            "{label},{},{}",
            cell(&h.seq_only, k),
            cell(&h.seq_plus_direct, k)
        );
    }
    s
}

pub fn parse_histogram(text: &str) -> Result<Histogram> {
    const WHAT: &str = "histogram CSV";
    let mut r = reader(text);
    if headers(WHAT, &mut r)? != HIST_HEADER {
        return Err(CliError::Input(format!(
            "{WHAT}: header must be {}",
            HIST_HEADER.join(",")
        )));
    }
    let mut cols: [[Option<f64>; NUM_IONS]; 2] = [[None; NUM_IONS]; 2];
    let mut seen = [false; NUM_IONS];
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{WHAT}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let sp = SpeciesIndex::parse_label(&rec[0]).map_err(|e| input(WHAT, line, e))?;
        let k = sp
            .get()
            .checked_sub(1)
            .ok_or_else(|| input(WHAT, line, "histograms list ions only"))?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(input(
                WHAT,
                line,
                format!("duplicate species {}", sp.label()),
            ));
        }
        for c in 0..2 {
            let f = &rec[c + 1];
            if !f.is_empty() {
                let v = parse_f64(WHAT, line, f)?;
                if v < 0.0 {
                    return Err(input(WHAT, line, "heights must be non-negative"));
                }
                cols[c][k] = Some(v);
            }
        }
    }
    let column = |c: [Option<f64>; NUM_IONS]| -> Result<Option<[f64; NUM_IONS]>> {
        if c.iter().all(Option::is_none) {
            return Ok(None);
        }
        let mut out = [0.0; NUM_IONS];
        for (k, v) in c.iter().enumerate() {
            out[k] = v.ok_or_else(|| {
                CliError::Input(format!("{WHAT}: column has a gap at ion {}", k + 1))
            })?;
        }
        Ok(Some(out))
    };
    let h = Histogram {
        seq_only: column(cols[0])?,
        seq_plus_direct: column(cols[1])?,
    };
    if h.primary().is_none() {
        return Err(CliError::Input(format!("{WHAT}: no data")));
    }
    Ok(h)
}

/// Measured relative peak heights, normalized so the largest is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentHistogram {
    /// `(species, height)` in file order.
    pub heights: Vec<(SpeciesIndex, f64)>,
}

impl ExperimentHistogram {
    /// Species whose normalized height is exactly 1.
    pub fn reference(&self) -> SpeciesIndex {
        self.heights
            .iter()
            .find(|(_, h)| *h == 1.0)
            .map(|(s, _)| *s)
            .expect("normalized on construction")
    }
}

pub fn parse_experiment(text: &str) -> Result<ExperimentHistogram> {
    const WHAT: &str = "experiment CSV";
    let mut r = reader(text);
    if headers(WHAT, &mut r)? != ["species", "relative_height"] {
        return Err(CliError::Input(format!(
            "{WHAT}: header must be species,relative_height"
        )));
    }
    let mut heights: Vec<(SpeciesIndex, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{WHAT}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let sp = SpeciesIndex::parse_label(&rec[0]).map_err(|e| input(WHAT, line, e))?;
        if sp.get() == 0 {
            return Err(input(WHAT, line, "the neutral has no ion peak"));
        }
        if heights.iter().any(|(s, _)| *s == sp) {
            return Err(input(
                WHAT,
                line,
                format!("duplicate species {}", sp.label()),
            ));
        }
        let v = parse_f64(WHAT, line, &rec[1])?;
        if v < 0.0 {
            return Err(input(WHAT, line, "heights must be non-negative"));
        }
        heights.push((sp, v));
    }
    let max = heights.iter().map(|(_, h)| *h).fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(CliError::Input(format!(
            "{WHAT}: needs at least one positive height"
        )));
    }
    for (_, h) in heights.iter_mut() {
        *h /= max;
    }
    Ok(ExperimentHistogram { heights })
}

pub fn format_trajectory(rows: &[TrajectoryPoint]) -> String {
    let mut s = String::from("t_s");
    for j in 0..NUM_SPECIES {
        let _ = write!(s, ",N{j}");
    }
    s.push('\n');
    for r in rows {
        s.push_str(&fmt_f64(r.t));
        for v in &r.populations {
            s.push(',');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
