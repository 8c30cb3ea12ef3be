//! Hybrid adaptive integrator for `dN/dt = A(t) N` with lower-triangular
//! `A`: Dormand-Prince 5(4) with PI step control while the step is
//! accuracy-limited, and three-stage Radau IIA (solved exactly, species by
//! species) once the step becomes stability-limited.

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::kinetics::rates::RateModel;
use crate::kinetics::{IntegrationStats, KineticsOptions, TrajectoryPoint};
use crate::model::NUM_SPECIES;

type State = [f64; NUM_SPECIES];

const MAX_CHANNELS: usize = 32;
/// Switch to the implicit stepper above this `h * rho`.
const EXPLICIT_LIMIT: f64 = 3.0;
/// Switch back to the explicit stepper below this `h * rho`.
const IMPLICIT_RETURN: f64 = 0.5;
/// Steps never cover more than this many sample intervals of the flux.
const MAX_GRID_INTERVALS: f64 = 8.0;
/// Largest tolerated drift of the population sum.
pub(crate) const INTEGRITY_LIMIT: f64 = 1e-6;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller (Hairer & Wanner's DOPRI5 defaults).
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct RadauTableau {
    c: [f64; 3],
    a: [[f64; 3]; 3],
}

fn radau() -> RadauTableau {
    let s6 = 6f64.sqrt();
    RadauTableau {
        c: [(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0],
        a: [
            [(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0],
            [(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0],
            [(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Explicit,
    Implicit,
}

pub(crate) struct Solver<'a> {
    model: &'a RateModel,
    flux: &'a MonotoneCubic,
    opts: &'a KineticsOptions,
    tableau: RadauTableau,
    rates: [f64; MAX_CHANNELS],
    pub stats: IntegrationStats,
}

impl<'a> Solver<'a> {
    pub fn new(model: &'a RateModel, flux: &'a MonotoneCubic, opts: &'a KineticsOptions) -> Result<Self> {
        if model.len() > MAX_CHANNELS {
            return Err(Error::Config(format!("at most {MAX_CHANNELS} channels supported")));
        }
        Ok(Self {
            model,
            flux,
            opts,
            tableau: radau(),
            rates: [0.0; MAX_CHANNELS],
            stats: IntegrationStats::default(),
        })
    }

    #[inline]
    fn flux_at(&self, t: f64) -> f64 {
        let i = self.flux.interval_of(t);
        let s = t - self.flux.node(i);
        self.flux.piece(i).eval(s).max(0.0)
    }

    /// RHS evaluation; returns the spectral radius at `t`.
    #[inline]
    fn rhs(&mut self, t: f64, y: &State, dy: &mut State) -> f64 {
        self.stats.rhs_evals += 1;
        let f = self.flux_at(t);
        let n = self.model.len();
        let mut rates = self.rates;
        self.model.rates(f, &mut rates[..n]);
        self.rates = rates;
        self.model.derivative(&rates[..n], y, dy)
    }

    fn err_norm(&self, y0: &State, y1: &State, e: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..NUM_SPECIES {
            let sk = self.opts.abs_tol + self.opts.rel_tol * y0[i].abs().max(y1[i].abs());
            let r = e[i] / sk;
            acc += r * r;
        }
        (acc / NUM_SPECIES as f64).sqrt()
    }

    /// Integrates from `t_start` to `t_end`, returning the final state.
    pub fn run(
        &mut self,
        t_start: f64,
        t_end: f64,
        y0: State,
        mut trajectory: Option<&mut Vec<TrajectoryPoint>>,
    ) -> Result<State> {
        let span = t_end - t_start;
        let h_min = span * 1e-15;
        let h_max = self.opts.max_step.min(MAX_GRID_INTERVALS * self.flux.spacing()).min(span);
        let initial_sum: f64 = y0.iter().sum();
        let mut t = t_start;
        let mut y = y0;
        let mut h = self.flux.spacing().min(h_max);
        let mut k1 = [0.0; NUM_SPECIES];
        let mut rho = self.rhs(t, &y, &mut k1);
        let mut method = if h * rho > EXPLICIT_LIMIT {
            Method::Implicit
        } else {
            Method::Explicit
        };
        let mut facold = 1e-4f64;
        let mut last_rejected = false;
        if let Some(tr) = trajectory.as_deref_mut() {
            tr.push(TrajectoryPoint { t, populations: y });
        }
        self.record_state(t, &y, initial_sum)?;

        while t < t_end {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("step budget of {} exhausted", self.opts.max_steps),
                });
            }
            let mut last = false;
            if t + 1.01 * h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h < h_min {
                if method == Method::Explicit {
                    method = Method::Implicit;
                    h = (h_min * 1e3).min(t_end - t);
                    continue;
                }
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("step size {h:e} s underflowed"),
                });
            }
            match method {
                Method::Explicit => {
                    let (y_new, k7, rho_new, err) = self.dopri_step(t, h, &y, &k1);
                    if !err.is_finite() {
                        h *= 0.1;
                        self.stats.rejected += 1;
                        continue;
                    }
                    let expo1 = 0.2 - BETA * 0.75;
                    let fac11 = err.powf(expo1);
                    if err <= 1.0 {
                        let mut fac = fac11 / facold.powf(BETA);
                        fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                        let mut h_new = (h / fac).min(h_max);
                        if last_rejected {
                            h_new = h_new.min(h);
                        }
                        facold = err.max(1e-4);
                        t = if last { t_end } else { t + h };
                        y = y_new;
                        k1 = k7;
                        rho = rho_new;
                        self.stats.accepted += 1;
                        last_rejected = false;
                        self.record_state(t, &y, initial_sum)?;
                        if let Some(tr) = trajectory.as_deref_mut() {
                            tr.push(TrajectoryPoint { t, populations: y });
                        }
                        h = h_new;
                        if h * rho > EXPLICIT_LIMIT {
                            method = Method::Implicit;
                        }
                    } else {
                        h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
                        self.stats.rejected += 1;
                        last_rejected = true;
                        if h * rho > EXPLICIT_LIMIT {
                            method = Method::Implicit;
                        }
                    }
                }
                Method::Implicit => {
                    let full = self.radau_step(t, h, &y);
                    let half = self.radau_step(t, 0.5 * h, &y);
                    let half2 = self.radau_step(t + 0.5 * h, 0.5 * h, &half);
                    let mut e = [0.0; NUM_SPECIES];
                    for i in 0..NUM_SPECIES {
                        e[i] = (half2[i] - full[i]) / 15.0;
                    }
                    let err = self.err_norm(&y, &half2, &e);
                    if !err.is_finite() {
                        h *= 0.1;
                        self.stats.rejected += 1;
                        continue;
                    }
                    let fac = (SAFE * err.powf(-1.0 / 6.0)).clamp(FAC_MIN, 5.0);
                    if err <= 1.0 {
                        t = if last { t_end } else { t + h };
                        y = half2;
                        self.stats.accepted += 1;
                        self.stats.implicit_steps += 1;
                        self.record_state(t, &y, initial_sum)?;
                        if let Some(tr) = trajectory.as_deref_mut() {
                            tr.push(TrajectoryPoint { t, populations: y });
                        }
                        let mut h_new = (h * fac).min(h_max);
                        if last_rejected {
                            h_new = h_new.min(h);
                        }
                        last_rejected = false;
                        h = h_new;
                        if t < t_end {
                            rho = self.rhs(t, &y, &mut k1);
                            if h * rho < IMPLICIT_RETURN {
                                method = Method::Explicit;
                                facold = 1e-4;
                            }
                        }
                    } else {
                        h *= fac.min(1.0);
                        self.stats.rejected += 1;
                        last_rejected = true;
                    }
                }
            }
        }
        Ok(y)
    }

    fn record_state(&mut self, t: f64, y: &State, initial_sum: f64) -> Result<()> {
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        for v in y {
            if !v.is_finite() {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: "non-finite population".into(),
                });
            }
            sum += v;
            min = min.min(*v);
        }
        let dev = (sum - initial_sum).abs();
        self.stats.max_conservation_error = self.stats.max_conservation_error.max(dev);
        self.stats.min_population = self.stats.min_population.min(min);
        if dev > INTEGRITY_LIMIT {
            return Err(Error::Integrity {
                t,
                reason: format!("population sum drifted by {dev:e}"),
            });
        }
        if min < -INTEGRITY_LIMIT {
            return Err(Error::Integrity {
                t,
                reason: format!("population dropped to {min:e}"),
            });
        }
        Ok(())
    }

    /// One Dormand-Prince step. Returns the 5th-order solution, the RHS at
    /// the new point, the spectral radius there and the error norm.
    fn dopri_step(&mut self, t: f64, h: f64, y: &State, k1: &State) -> (State, State, f64, f64) {
        let mut k2 = [0.0; NUM_SPECIES];
        let mut k3 = [0.0; NUM_SPECIES];
        let mut k4 = [0.0; NUM_SPECIES];
        let mut k5 = [0.0; NUM_SPECIES];
        let mut k6 = [0.0; NUM_SPECIES];
        let mut k7 = [0.0; NUM_SPECIES];
        let mut yt = [0.0; NUM_SPECIES];

        for i in 0..NUM_SPECIES {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        self.rhs(t + C2 * h, &yt, &mut k2);
        for i in 0..NUM_SPECIES {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.rhs(t + C3 * h, &yt, &mut k3);
        for i in 0..NUM_SPECIES {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.rhs(t + C4 * h, &yt, &mut k4);
        for i in 0..NUM_SPECIES {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.rhs(t + C5 * h, &yt, &mut k5);
        for i in 0..NUM_SPECIES {
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.rhs(t + h, &yt, &mut k6);
        let mut y_new = [0.0; NUM_SPECIES];
        for i in 0..NUM_SPECIES {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let rho = self.rhs(t + h, &y_new, &mut k7);
        let mut e = [0.0; NUM_SPECIES];
        for i in 0..NUM_SPECIES {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = self.err_norm(y, &y_new, &e);
        (y_new, k7, rho, err)
    }

    /// One Radau IIA step. The stage equations are linear and the rate
    /// matrix is lower triangular, so species are solved in charge order with
    /// one 3x3 system each.
    fn radau_step(&mut self, t: f64, h: f64, y: &State) -> State {
        let n = self.model.len();
        let mut stage_rates = [[0.0f64; MAX_CHANNELS]; 3];
        for (i, r) in stage_rates.iter_mut().enumerate() {
            let f = self.flux_at(t + self.tableau.c[i] * h);
            self.model.rates(f, &mut r[..n]);
        }
        self.stats.rhs_evals += 3;
        let a = self.tableau.a;
        // stage[i][s]: population of species s at stage i.
        let mut stage = [[0.0f64; NUM_SPECIES]; 3];
        for s in 0..NUM_SPECIES {
            let mut loss = [0.0f64; 3];
            let mut gain = [0.0f64; 3];
            for i in 0..3 {
                for &c in &self.model.outgoing[s] {
                    loss[i] += stage_rates[i][c];
                }
                for &c in &self.model.incoming[s] {
                    gain[i] += stage_rates[i][c] * stage[i][self.model.from[c]];
                }
            }
            // (I + h a diag(loss)) x = y_s + h a gain
            let mut m = [[0.0f64; 3]; 3];
            let mut rhs = [0.0f64; 3];
            for i in 0..3 {
                rhs[i] = y[s];
                for j in 0..3 {
                    m[i][j] = if i == j { 1.0 } else { 0.0 } + h * a[i][j] * loss[j];
                    rhs[i] += h * a[i][j] * gain[j];
                }
            }
            let x = solve3(m, rhs);
            for i in 0..3 {
                stage[i][s] = x[i];
            }
        }
        stage[2]
    }
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let p = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, p);
        b.swap(col, p);
        let d = m[col][col];
        for r in col + 1..3 {
            let f = m[r][col] / d;
            if f != 0.0 {
                for k in col..3 {
                    m[r][k] -= f * m[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for k in r + 1..3 {
            acc -= m[r][k] * x[k];
        }
        x[r] = acc / m[r][r];
    }
    x
}
