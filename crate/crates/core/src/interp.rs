//! Shape-preserving cubic Hermite interpolation on uniform grids.
//!
//! Node derivatives come from a fourth-order centered difference and are then
//! passed through a Hyman-type filter so that every interval is monotone
//! (Fritsch-Carlson region `0 <= alpha, beta <= 3`). The interpolant therefore
//! never leaves the range spanned by the two bracketing samples, which keeps
//! interpolated photon flux nonnegative on spiky records.

use crate::error::{Error, Result};

/// A C¹ piecewise-cubic, interval-wise monotone interpolant through uniformly
/// spaced samples.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
    /// Largest sample jump next to a maximum that may still be relaxed.
    free_max: Option<f64>,
}

/// Cubic Hermite coefficients of one interval in the local variable
/// `s = x - x_i`: `p(s) = c0 + c1 s + c2 s^2 + c3 s^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPiece {
    pub c: [f64; 4],
}

impl CubicPiece {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let c = &self.c;
        ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
    }
}

impl MonotoneCubic {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        Self::build(x0, h, y, None)
    }

    /// Like [`MonotoneCubic::new`], except near strict local maxima whose
    /// two neighbours lie within `max_jump` of the peak sample. There the
    /// peak node keeps its high-order slope and its neighbours are bounded
    /// by their outer secants only, so a smooth peak between samples is
    /// followed instead of clipped at the largest sample. Sharper maxima
    /// (noise spikes) are treated as usual.
    pub fn with_free_maxima(x0: f64, h: f64, y: Vec<f64>, max_jump: f64) -> Result<Self> {
        Self::build(x0, h, y, Some(max_jump))
    }

    fn build(x0: f64, h: f64, y: Vec<f64>, free_max: Option<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(Error::Input(format!("grid spacing must be positive, got {h}")));
        }
        if y.len() < 2 {
            return Err(Error::Input("interpolation needs at least two samples".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("samples must be finite".into()));
        }
        let d = limited_slopes(&y, h, free_max);
        Ok(Self { x0, h, y, d, free_max })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x_start(&self) -> f64 {
        self.x0
    }

    pub fn x_end(&self) -> f64 {
        self.x0 + (self.y.len() - 1) as f64 * self.h
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    /// Index of the interval containing `x`, clamped to the grid.
    #[inline]
    pub fn interval_of(&self, x: f64) -> usize {
        let last = self.y.len() - 2;
        let u = (x - self.x0) / self.h;
        if !(u > 0.0) {
            0
        } else {
            (u as usize).min(last)
        }
    }

    /// Left node of interval `i`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    /// Hermite coefficients of interval `i` in `s = x - node(i)`.
    #[inline]
    pub fn piece(&self, i: usize) -> CubicPiece {
        let h = self.h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.d[i], self.d[i + 1]);
        let delta = (y1 - y0) / h;
        let c2 = (3.0 * delta - 2.0 * d0 - d1) / h;
        let c3 = (d0 + d1 - 2.0 * delta) / (h * h);
        CubicPiece {
            c: [y0, d0, c2, c3],
        }
    }

    /// Value of the interpolant; constant extrapolation outside the grid.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return self.y[0];
        }
        if x >= self.x_end() {
            return self.y[self.y.len() - 1];
        }
        let i = self.interval_of(x);
        let s = x - self.node(i);
        // Hermite basis form keeps values inside [min(y0,y1), max(y0,y1)]
        // up to rounding.
        let v = self.piece(i).eval(s);
        let (lo, mut hi) = if self.y[i] <= self.y[i + 1] {
            (self.y[i], self.y[i + 1])
        } else {
            (self.y[i + 1], self.y[i])
        };
        if let Some(j) = self.free_max {
            if free_peak(&self.y, i, j) || free_peak(&self.y, i + 1, j) {
                hi = f64::INFINITY;
            }
        }
        v.clamp(lo, hi)
    }
}

/// Strict maximum at `k` with every sample difference within two nodes of it
/// at most `max_jump`.
fn free_peak(y: &[f64], k: usize, max_jump: f64) -> bool {
    if k == 0 || k + 1 >= y.len() || !(y[k] > y[k - 1] && y[k] > y[k + 1]) {
        return false;
    }
    let lo = k.saturating_sub(2);
    let hi = (k + 2).min(y.len() - 1);
    y[lo..=hi].windows(2).all(|w| (w[1] - w[0]).abs() <= max_jump)
}

fn limited_slopes(y: &[f64], h: f64, free_max: Option<f64>) -> Vec<f64> {
    let n = y.len();
    let secant: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = secant[0];
        d[1] = secant[0];
        return d;
    }
    for i in 0..n {
        let raw = if i >= 2 && i + 2 < n {
            (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
        } else if i >= 1 && i + 1 < n {
            (y[i + 1] - y[i - 1]) / (2.0 * h)
        } else if i == 0 {
            (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
        } else {
            (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
        };
        d[i] = raw;
    }
    // Hyman filter: zero at extrema, same sign as neighbouring secants, and
    // magnitude at most three times the smaller adjacent secant.
    for i in 0..n {
        let left = if i > 0 { Some(secant[i - 1]) } else { None };
        let right = if i + 1 < n { Some(secant[i]) } else { None };
        let di = d[i];
        d[i] = match (left, right) {
            (Some(l), Some(r)) => {
                let peak_at = |k: usize| free_max.is_some_and(|j| free_peak(y, k, j));
                if peak_at(i) {
                    let b = 3.0 * l.max(-r);
                    di.clamp(-b, b)
                } else if peak_at(i + 1) || peak_at(i.wrapping_sub(1)) {
                    // The secant across the peak says nothing about the
                    // slope here; bound by the outer one.
                    let outer = if peak_at(i + 1) { l } else { r };
                    if di * outer <= 0.0 {
                        0.0
                    } else {
                        di.signum() * di.abs().min(3.0 * outer.abs())
                    }
                } else if l * r <= 0.0 {
                    0.0
                } else {
                    let bound = 3.0 * l.abs().min(r.abs());
                    if di * l <= 0.0 {
                        0.0
                    } else {
                        di.signum() * di.abs().min(bound)
                    }
                }
            }
            (None, Some(s)) | (Some(s), None) => {
                if di * s <= 0.0 {
                    0.0
                } else {
                    di.signum() * di.abs().min(3.0 * s.abs())
                }
            }
            (None, None) => 0.0,
        };
    }
    d
}
