use crate::kinetics::ChannelMode;
use crate::model::{ChannelTable, NUM_SPECIES};

/// Largest |ln| of a rescaled cross section evaluated on the fast path.
const SAFE_LN: f64 = 600.0;

/// Channel rates `sigma * F^n` for one table and channel mode.
///
/// Cross sections span hundreds of decades, so each is rescaled by a common
/// reference flux `F_ref`: `rate = (sigma F_ref^n) (F / F_ref)^n`. `F_ref` is
/// chosen to minimize the largest |ln(sigma F_ref^n)|; channels that still do
/// not fit, and fluxes too large for the power table, fall back to
/// `exp(ln sigma + n ln F)`.
#[derive(Debug, Clone)]
pub(crate) struct RateModel {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    order: Vec<usize>,
    ln_sigma: Vec<f64>,
    scaled_sigma: Vec<f64>,
    fast: Vec<bool>,
    inv_ref: f64,
    max_order: usize,
    x_safe: f64,
    /// Channel indices grouped by source species.
    pub outgoing: [Vec<usize>; NUM_SPECIES],
    /// Channel indices grouped by destination species.
    pub incoming: [Vec<usize>; NUM_SPECIES],
}

impl RateModel {
    pub fn new(table: &ChannelTable, mode: ChannelMode) -> Self {
        let active: Vec<_> = table
            .channels()
            .iter()
            .filter(|c| match mode {
                ChannelMode::SequentialOnly => c.sequential,
                ChannelMode::SequentialPlusDirect => true,
            })
            .collect();
        let from: Vec<usize> = active.iter().map(|c| c.from.get()).collect();
        let to: Vec<usize> = active.iter().map(|c| c.to.get()).collect();
        let order: Vec<usize> = active.iter().map(|c| c.order as usize).collect();
        let ln_sigma: Vec<f64> = active.iter().map(|c| c.sigma.ln()).collect();
        let ln_ref = minimax_reference(&ln_sigma, &order);
        let mut scaled_sigma = Vec::with_capacity(active.len());
        let mut fast = Vec::with_capacity(active.len());
        for (ls, n) in ln_sigma.iter().zip(&order) {
            if *ls == f64::NEG_INFINITY {
                scaled_sigma.push(0.0);
                fast.push(true);
                continue;
            }
            let l = ls + *n as f64 * ln_ref;
            let ok = l.abs() < SAFE_LN;
            scaled_sigma.push(if ok { l.exp() } else { 0.0 });
            fast.push(ok);
        }
        let max_order = order.iter().copied().max().unwrap_or(1);
        let mut outgoing: [Vec<usize>; NUM_SPECIES] = Default::default();
        let mut incoming: [Vec<usize>; NUM_SPECIES] = Default::default();
        for (c, (&f, &t)) in from.iter().zip(&to).enumerate() {
            outgoing[f].push(c);
            incoming[t].push(c);
        }
        Self {
            from,
            to,
            order,
            ln_sigma,
            scaled_sigma,
            fast,
            inv_ref: (-ln_ref).exp(),
            max_order,
            x_safe: (SAFE_LN / max_order as f64).exp(),
            outgoing,
            incoming,
        }
    }

    pub fn len(&self) -> usize {
        self.from.len()
    }

    /// Fills `out[c]` with the rate (s⁻¹) of channel `c` at flux `flux`.
    #[inline]
    pub fn rates(&self, flux: f64, out: &mut [f64]) {
        debug_assert!(flux >= 0.0);
        let x = flux * self.inv_ref;
        if x <= self.x_safe {
            let mut pow = [0.0f64; 16];
            let top = self.max_order.min(15);
            pow[0] = 1.0;
            for k in 1..=top {
                pow[k] = pow[k - 1] * x;
            }
            for c in 0..self.from.len() {
                let n = self.order[c];
                out[c] = if self.fast[c] && n <= 15 {
                    self.scaled_sigma[c] * pow[n]
                } else {
                    self.slow_rate(c, flux)
                };
            }
        } else {
            for (c, r) in out.iter_mut().enumerate().take(self.from.len()) {
                *r = self.slow_rate(c, flux);
            }
        }
    }

    #[inline]
    fn slow_rate(&self, c: usize, flux: f64) -> f64 {
        if flux <= 0.0 {
            return 0.0;
        }
        (self.ln_sigma[c] + self.order[c] as f64 * flux.ln()).exp()
    }

    /// Population derivative for given channel rates; returns the largest
    /// total loss rate out of any species (the spectral radius of the
    /// triangular rate matrix).
    #[inline]
    pub fn derivative(&self, rates: &[f64], pop: &[f64; NUM_SPECIES], dpop: &mut [f64; NUM_SPECIES]) -> f64 {
        *dpop = [0.0; NUM_SPECIES];
        let mut out_rate = [0.0f64; NUM_SPECIES];
        for c in 0..self.from.len() {
            let f = self.from[c];
            let flow = rates[c] * pop[f];
            dpop[f] -= flow;
            dpop[self.to[c]] += flow;
            out_rate[f] += rates[c];
        }
        out_rate.iter().copied().fold(0.0, f64::max)
    }
}

/// `argmin_L max_c |a_c + n_c L|` over channels with finite `a_c`, by
/// ternary search on the convex piecewise-linear objective.
fn minimax_reference(ln_sigma: &[f64], order: &[usize]) -> f64 {
    let pts: Vec<(f64, f64)> = ln_sigma
        .iter()
        .zip(order)
        .filter(|(a, _)| a.is_finite())
        .map(|(a, n)| (*a, *n as f64))
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    let obj = |l: f64| pts.iter().map(|(a, n)| (a + n * l).abs()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-2000.0f64, 2000.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if obj(m1) <= obj(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}
