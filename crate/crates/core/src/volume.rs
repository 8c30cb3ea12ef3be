//! Focal-volume averaging of single-point yield curves.
//!
//! Intensities are handled in `u = ln I`. For the transverse Gaussian the
//! area per unit `u` is constant; for the three-dimensional Gaussian focus
//! the volume per unit `u` is `beta (2 I + I0) / (3 I)` with
//! `beta = sqrt(I0 / I - 1)`, integrated in `s = sqrt(ln I0 - u)` so the
//! square-root behaviour at the peak becomes smooth.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::model::NUM_SPECIES;
use crate::quad::{GaussLegendre, NeumaierSum};

pub const DEFAULT_FMIN: f64 = 1e-4;
pub const DEFAULT_POINTS_PER_DECADE: usize = 25;
/// Gauss-Legendre nodes per panel.
const PANEL_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VolumeKind {
    None,
    #[default]
    GaussianTransverse2d,
    GaussianBeam3d,
}

impl VolumeKind {
    pub fn name(self) -> &'static str {
        match self {
            VolumeKind::None => "none",
            VolumeKind::GaussianTransverse2d => "gaussian_transverse_2d",
            VolumeKind::GaussianBeam3d => "gaussian_beam_3d",
        }
    }
}

impl fmt::Display for VolumeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VolumeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(VolumeKind::None),
            "gaussian_transverse_2d" => Ok(VolumeKind::GaussianTransverse2d),
            "gaussian_beam_3d" => Ok(VolumeKind::GaussianBeam3d),
            other => Err(Error::Config(format!("unknown volume kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeModel {
    pub kind: VolumeKind,
    /// Beam waist (1/e² intensity radius), cm.
    pub w0_cm: f64,
    /// Rayleigh range, cm; used by the 3d model.
    pub zr_cm: f64,
    /// Lowest intensity, as a fraction of the peak, that contributes.
    pub fmin: f64,
}

impl Default for VolumeModel {
    fn default() -> Self {
        Self {
            kind: VolumeKind::GaussianTransverse2d,
            w0_cm: 1e-4,
            zr_cm: 1e-2,
            fmin: DEFAULT_FMIN,
        }
    }
}

impl VolumeModel {
    pub fn new(kind: VolumeKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fmin > 0.0 && self.fmin < 1.0) {
            return Err(Error::Config(format!("fmin must lie in (0, 1), got {}", self.fmin)));
        }
        if self.kind != VolumeKind::None && !(self.w0_cm > 0.0 && self.w0_cm.is_finite()) {
            return Err(Error::Config(format!("w0_cm must be positive, got {}", self.w0_cm)));
        }
        if self.kind == VolumeKind::GaussianBeam3d && !(self.zr_cm > 0.0 && self.zr_cm.is_finite()) {
            return Err(Error::Config(format!("zR_cm must be positive, got {}", self.zr_cm)));
        }
        Ok(())
    }
}

/// Normalized density of focal area or volume per unit intensity on
/// `[fmin I0, I0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDensity {
    pub kind: VolumeKind,
    pub i0: f64,
    pub i_min: f64,
    norm: f64,
}

impl WeightDensity {
    /// Density at intensity `i`; zero outside the interval. For
    /// [`VolumeKind::None`] the weight is a point mass at `I0` and this
    /// returns zero everywhere.
    pub fn density(&self, i: f64) -> f64 {
        if !(i >= self.i_min && i <= self.i0) {
            return 0.0;
        }
        match self.kind {
            VolumeKind::None => 0.0,
            VolumeKind::GaussianTransverse2d => 1.0 / (i * self.norm),
            VolumeKind::GaussianBeam3d => {
                let beta = (self.i0 / i - 1.0).max(0.0).sqrt();
                beta * (2.0 * i + self.i0) / (3.0 * i * i) / self.norm
            }
        }
    }

    /// Fraction of the weight with intensity above `i`.
    pub fn fraction_above(&self, i: f64) -> f64 {
        let i = i.clamp(self.i_min, self.i0);
        match self.kind {
            VolumeKind::None => {
                if i < self.i0 {
                    1.0
                } else {
                    0.0
                }
            }
            VolumeKind::GaussianTransverse2d => (self.i0 / i).ln() / self.norm,
            VolumeKind::GaussianBeam3d => beam_volume_above(self.i0 / i) / self.norm,
        }
    }
}

/// Volume with intensity above `I0 / ratio`, in units of `pi w0^2 zR`.
fn beam_volume_above(ratio: f64) -> f64 {
    let b = (ratio - 1.0).max(0.0).sqrt();
    4.0 / 3.0 * b + 2.0 / 9.0 * b * b * b - 4.0 / 3.0 * b.atan()
}

pub fn intensity_weight_density(model: &VolumeModel, i0: f64) -> Result<WeightDensity> {
    model.validate()?;
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(Error::Domain(format!("peak intensity must be positive, got {i0}")));
    }
    let norm = match model.kind {
        VolumeKind::None => 1.0,
        VolumeKind::GaussianTransverse2d => (1.0 / model.fmin).ln(),
        VolumeKind::GaussianBeam3d => beam_volume_above(1.0 / model.fmin),
    };
    Ok(WeightDensity {
        kind: model.kind,
        i0,
        i_min: model.fmin * i0,
        norm,
    })
}

/// Samples below this are treated as zero by the interpolant.
const LOG_FLOOR: f64 = 1e-300;
/// Peaks whose neighbours are within this factor `e^x` are smooth enough to
/// interpolate through.
const SMOOTH_PEAK_JUMP: f64 = 1.0;

/// Per-species yields on a grid uniform in `ln I`. Between nodes each
/// species is a monotone cubic in `(ln I, ln y)`, which follows power-law
/// rises and exponential depletion closely; smooth maxima are not clipped.
#[derive(Debug, Clone)]
pub struct YieldCurve {
    intensities: Vec<f64>,
    yields: Vec<[f64; NUM_SPECIES]>,
    interp: Vec<MonotoneCubic>,
}

impl YieldCurve {
    /// `intensities` must be increasing and uniformly spaced in `ln I`.
    pub fn new(intensities: Vec<f64>, yields: Vec<[f64; NUM_SPECIES]>) -> Result<Self> {
        if intensities.len() < 2 || intensities.len() != yields.len() {
            return Err(Error::Input(format!(
                "yield curve needs matching intensity and yield rows (at least 2), got {} and {}",
                intensities.len(),
                yields.len()
            )));
        }
        if intensities.iter().any(|i| !(*i > 0.0 && i.is_finite())) {
            return Err(Error::Input("yield curve intensities must be positive".into()));
        }
        let u: Vec<f64> = intensities.iter().map(|i| i.ln()).collect();
        let h = (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::Input("yield curve intensities must increase".into()));
        }
        for (k, uk) in u.iter().enumerate() {
            if (uk - (u[0] + k as f64 * h)).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::Input(format!(
                    "yield curve grid is not uniform in ln I at row {k}"
                )));
            }
        }
        let mut interp = Vec::with_capacity(NUM_SPECIES);
        for j in 0..NUM_SPECIES {
            let col: Vec<f64> = yields.iter().map(|y| y[j].max(LOG_FLOOR).ln()).collect();
            interp.push(MonotoneCubic::with_free_maxima(u[0], h, col, SMOOTH_PEAK_JUMP)?);
        }
        Ok(Self {
            intensities,
            yields,
            interp,
        })
    }

    /// Samples `f` on `points_per_decade` log-spaced points covering
    /// `[lo, hi]`.
    pub fn sample<F>(lo: f64, hi: f64, points_per_decade: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<[f64; NUM_SPECIES]>,
    {
        let grid = log_grid(lo, hi, points_per_decade)?;
        let yields = grid.iter().map(|i| f(*i)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, yields)
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn yields(&self) -> &[[f64; NUM_SPECIES]] {
        &self.yields
    }

    pub fn min_intensity(&self) -> f64 {
        self.intensities[0]
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensities[self.intensities.len() - 1]
    }

    /// Nodes in `ln I`.
    fn ln_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let m = &self.interp[0];
        (0..m.len()).map(move |k| m.node(k))
    }

    /// Interpolated yields at intensity `i`.
    pub fn eval(&self, i: f64) -> Result<[f64; NUM_SPECIES]> {
        let (lo, hi) = (self.min_intensity(), self.max_intensity());
        let tol = 1e-12;
        if !(i >= lo * (1.0 - tol) && i <= hi * (1.0 + tol)) {
            return Err(Error::Range(format!("intensity {i:e} outside yield grid [{lo:e}, {hi:e}]")));
        }
        Ok(self.eval_ln(i.ln()))
    }

    fn eval_ln(&self, u: f64) -> [f64; NUM_SPECIES] {
        let m0 = &self.interp[0];
        let k = (u - m0.x_start()) / m0.spacing();
        let r = k.round();
        if (k - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.yields.len() {
            return self.yields[r as usize];
        }
        let mut out = [0.0; NUM_SPECIES];
        for (o, m) in out.iter_mut().zip(&self.interp) {
            let v = m.eval(u).exp();
            *o = if v <= LOG_FLOOR * (1.0 + 1e-9) { 0.0 } else { v };
        }
        out
    }
}

/// Log-spaced grid from `lo` to at least `hi` with exactly
/// `points_per_decade` points per decade, starting at `lo`.
pub fn log_grid(lo: f64, hi: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points_per_decade == 0 {
        return Err(Error::Input(format!("invalid log grid [{lo:e}, {hi:e}] at {points_per_decade}/decade")));
    }
    let ppd = points_per_decade as f64;
    let steps = (((hi / lo).log10() * ppd) - 1e-9).ceil().max(1.0) as usize;
    // Built in log10 so that whole decades come out exact.
    let v0 = lo.log10();
    Ok((0..=steps).map(|k| 10f64.powf(v0 + k as f64 / ppd)).collect())
}

/// Volume-averaged yields and the refinement error estimate (largest
/// absolute change across species when every panel is split in two).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeAverage {
    pub yields: [f64; NUM_SPECIES],
    pub error_estimate: f64,
}

/// `∫ y(I) w(I) dI / ∫ w(I) dI` per species over `[fmin I0, I0]`.
pub fn volume_average(curve: &YieldCurve, model: &VolumeModel, i0: f64) -> Result<VolumeAverage> {
    let w = intensity_weight_density(model, i0)?;
    let needed_lo = if model.kind == VolumeKind::None { i0 } else { w.i_min };
    let tol = 1e-12;
    if needed_lo < curve.min_intensity() * (1.0 - tol) || i0 > curve.max_intensity() * (1.0 + tol) {
        return Err(Error::Input(format!(
            "yield grid [{:e}, {:e}] W/cm2 does not cover [{needed_lo:e}, {i0:e}]",
            curve.min_intensity(),
            curve.max_intensity()
        )));
    }
    if model.kind == VolumeKind::None {
        return Ok(VolumeAverage {
            yields: curve.eval(i0)?,
            error_estimate: 0.0,
        });
    }
    let breaks: Vec<f64> = curve.ln_nodes().collect();
    average_with_breaks(&w, &breaks, |u| curve.eval_ln(u))
}

/// Like [`volume_average`] for a yield function given in closed form.
/// Panels follow a grid of 25 points per decade anchored at `I0`.
pub fn volume_average_fn<F>(f: F, model: &VolumeModel, i0: f64) -> Result<VolumeAverage>
where
    F: Fn(f64) -> [f64; NUM_SPECIES],
{
    let w = intensity_weight_density(model, i0)?;
    if model.kind == VolumeKind::None {
        return Ok(VolumeAverage {
            yields: f(i0),
            error_estimate: 0.0,
        });
    }
    let h = std::f64::consts::LN_10 / DEFAULT_POINTS_PER_DECADE as f64;
    let u0 = i0.ln();
    let u_lo = w.i_min.ln();
    let count = ((u0 - u_lo) / h).ceil() as usize;
    let breaks: Vec<f64> = (0..=count).map(|k| u0 - k as f64 * h).rev().collect();
    average_with_breaks(&w, &breaks, |u| f(u.exp()))
}

fn average_with_breaks<F>(w: &WeightDensity, breaks: &[f64], f: F) -> Result<VolumeAverage>
where
    F: Fn(f64) -> [f64; NUM_SPECIES],
{
    let u0 = w.i0.ln();
    let u_lo = w.i_min.ln();
    let mut edges = vec![u_lo];
    edges.extend(breaks.iter().copied().filter(|u| *u > u_lo && *u < u0));
    edges.push(u0);
    let rule = GaussLegendre::new(PANEL_NODES);
    let coarse = integrate_panels(w, &edges, &rule, 1, &f);
    let fine = integrate_panels(w, &edges, &rule, 2, &f);
    let mut err: f64 = 0.0;
    for j in 0..NUM_SPECIES {
        err = err.max((fine[j] - coarse[j]).abs());
    }
    Ok(VolumeAverage {
        yields: fine,
        error_estimate: err,
    })
}

/// Weighted average with each panel `[edges[k], edges[k+1]]` (in `u`) split
/// into `split` equal parts in the integration variable.
fn integrate_panels<F>(w: &WeightDensity, edges: &[f64], rule: &GaussLegendre, split: usize, f: &F) -> [f64; NUM_SPECIES]
where
    F: Fn(f64) -> [f64; NUM_SPECIES],
{
    let u0 = w.i0.ln();
    let mut num: [NeumaierSum; NUM_SPECIES] = Default::default();
    let mut den = NeumaierSum::default();
    let mut accumulate = |u: f64, weight: f64| {
        let y = f(u);
        for j in 0..NUM_SPECIES {
            num[j].add(weight * y[j]);
        }
        den.add(weight);
    };
    for pair in edges.windows(2) {
        match w.kind {
            VolumeKind::GaussianTransverse2d => {
                let step = (pair[1] - pair[0]) / split as f64;
                for p in 0..split {
                    let a = pair[0] + p as f64 * step;
                    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                        let u = a + 0.5 * step * (x + 1.0);
                        accumulate(u, 0.5 * step * wt);
                    }
                }
            }
            VolumeKind::GaussianBeam3d => {
                // s = sqrt(u0 - u) runs from s_hi down to s_lo.
                let s_hi = (u0 - pair[0]).max(0.0).sqrt();
                let s_lo = (u0 - pair[1]).max(0.0).sqrt();
                let step = (s_hi - s_lo) / split as f64;
                for p in 0..split {
                    let a = s_lo + p as f64 * step;
                    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                        let s = a + 0.5 * step * (x + 1.0);
                        let u = u0 - s * s;
                        let ratio = (s * s).exp();
                        let beta = (s * s).exp_m1().max(0.0).sqrt();
                        // volume per unit u: beta (2 + I0/I) / 3; du = 2 s ds
                        let dens = beta * (2.0 + ratio) / 3.0;
                        accumulate(u, 0.5 * step * wt * dens * 2.0 * s);
                    }
                }
            }
            VolumeKind::None => unreachable!("point mass handled by caller"),
        }
    }
    let d = den.value();
    let mut out = [0.0; NUM_SPECIES];
    for j in 0..NUM_SPECIES {
        out[j] = num[j].value() / d;
    }
    out
}

/// Area average of `y(I0 exp(-2 r^2 / w0^2))` over the disk where the
/// intensity exceeds `fmin I0`, by composite Gauss-Legendre in the radius.
/// Independent of the `ln I` machinery above.
pub fn radial_average_2d<F>(f: F, i0: f64, w0_cm: f64, fmin: f64, panels: usize) -> [f64; NUM_SPECIES]
where
    F: Fn(f64) -> [f64; NUM_SPECIES],
{
    let r_max = w0_cm * (0.5 * (1.0 / fmin).ln()).sqrt();
    let rule = GaussLegendre::new(PANEL_NODES);
    let h = r_max / panels as f64;
    let mut num: [NeumaierSum; NUM_SPECIES] = Default::default();
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let r = a + 0.5 * h * (x + 1.0);
            let i = i0 * (-2.0 * r * r / (w0_cm * w0_cm)).exp();
            let y = f(i);
            let dw = 0.5 * h * wt * 2.0 * std::f64::consts::PI * r;
            for j in 0..NUM_SPECIES {
                num[j].add(dw * y[j]);
            }
        }
    }
    let area = std::f64::consts::PI * r_max * r_max;
    let mut out = [0.0; NUM_SPECIES];
    for j in 0..NUM_SPECIES {
        out[j] = num[j].value() / area;
    }
    out
}

/// Volume average of `y` over the region of a focused Gaussian beam where
/// the intensity exceeds `fmin I0`. Nested composite Gauss-Legendre in the
/// axial coordinate `z / zR` and in `s = 2 r^2 / w(z)^2`, so it shares no
/// code path with the `ln I` quadrature.
pub fn beam_average_3d<F>(f: F, i0: f64, fmin: f64, panels: usize) -> [f64; NUM_SPECIES]
where
    F: Fn(f64) -> [f64; NUM_SPECIES],
{
    let zeta_max = (1.0 / fmin - 1.0).sqrt();
    let rule = GaussLegendre::new(PANEL_NODES);
    let hz = zeta_max / panels as f64;
    let mut num: [NeumaierSum; NUM_SPECIES] = Default::default();
    let mut den = NeumaierSum::default();
    for p in 0..panels {
        let a = p as f64 * hz;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let zeta = a + 0.5 * hz * (x + 1.0);
            let g = 1.0 + zeta * zeta;
            let iz = i0 / g;
            let s_max = (1.0 / (fmin * g)).ln().max(0.0);
            let dz = 0.5 * hz * wt * g;
            den.add(dz * s_max);
            let hs = s_max / panels as f64;
            for q in 0..panels {
                let b = q as f64 * hs;
                for (xs, ws) in rule.nodes.iter().zip(&rule.weights) {
                    let s = b + 0.5 * hs * (xs + 1.0);
                    let y = f(iz * (-s).exp());
                    let dw = dz * 0.5 * hs * ws;
                    for j in 0..NUM_SPECIES {
                        num[j].add(dw * y[j]);
                    }
                }
            }
        }
    }
    let d = den.value();
    let mut out = [0.0; NUM_SPECIES];
    for j in 0..NUM_SPECIES {
        out[j] = num[j].value() / d;
    }
    out
}
