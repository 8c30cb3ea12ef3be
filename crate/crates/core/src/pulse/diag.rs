use crate::error::{Error, Result};
use crate::pulse::PulseRecord;
use crate::quad::pairwise_sum;

/// Ensemble estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Equal-time normalized moment `<F^n> / <F>^n` at the envelope center
/// (`t = 0`), estimated across records. Chaotic light gives `n!`;
/// deterministic records give exactly 1.
pub fn correlation_diagnostic(records: &[PulseRecord], order: u32) -> Result<CorrelationEstimate> {
    if records.len() < 100 {
        return Err(Error::Input(format!(
            "correlation diagnostic needs at least 100 records, got {}",
            records.len()
        )));
    }
    if !(1..=6).contains(&order) {
        return Err(Error::Domain(format!("correlation order must be in 1..=6, got {order}")));
    }
    let first = &records[0];
    if let Some(i) = records.iter().position(|r| !r.same_grid(first)) {
        return Err(Error::Input(format!("record {i} is on a different time grid")));
    }
    let c = first.center_index();
    // Normalizing by a reference sample leaves the ratio unchanged and makes
    // identical records produce exactly 1.
    let reference = match first.flux()[c] {
        v if v > 0.0 => v,
        _ => {
            let m = records.iter().map(|r| r.flux()[c]).fold(0.0, f64::max);
            if m == 0.0 {
                return Err(Error::Input("all records vanish at the envelope center".into()));
            }
            m
        }
    };
    let xs: Vec<f64> = records.iter().map(|r| r.flux()[c] / reference).collect();
    let n = order as i32;
    let s1 = pairwise_sum(&xs, |x| *x);
    let sn = pairwise_sum(&xs, |x| x.powi(n));
    let m = xs.len() as f64;
    let value = (sn / m) / (s1 / m).powi(n);

    let loo: Vec<f64> = xs
        .iter()
        .map(|x| {
            let a = (sn - x.powi(n)) / (m - 1.0);
            let b = (s1 - x) / (m - 1.0);
            a / b.powi(n)
        })
        .collect();
    let loo_mean = pairwise_sum(&loo, |v| *v) / m;
    let ss = pairwise_sum(&loo, |v| (v - loo_mean) * (v - loo_mean));
    let stderr = ((m - 1.0) / m * ss).sqrt();
    Ok(CorrelationEstimate {
        value,
        stderr,
        samples: xs.len(),
    })
}

/// Lag profile of the intensity correlation inside the stationary core of an
/// ensemble, with the field correlation recovered through the Siegert
/// relation `g2 = 1 + |g1|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCorrelationProfile {
    pub lags: Vec<f64>,
    pub g2: Vec<f64>,
    pub g1_abs: Vec<f64>,
    /// Lag at which a Gaussian fit of `|g1|` falls to `1/e`.
    pub half_width_1e: f64,
}

/// Estimates `g2(tau)` over lags `0..=max_lag` samples, averaging over all
/// time pairs whose mean flux exceeds half the maximum mean flux.
pub fn field_correlation_profile(records: &[PulseRecord], max_lag: usize) -> Result<FieldCorrelationProfile> {
    if records.len() < 2 {
        return Err(Error::Input("need at least two records".into()));
    }
    let first = &records[0];
    if let Some(i) = records.iter().position(|r| !r.same_grid(first)) {
        return Err(Error::Input(format!("record {i} is on a different time grid")));
    }
    let len = first.len();
    let m = records.len() as f64;
    let mean: Vec<f64> = (0..len)
        .map(|k| records.iter().map(|r| r.flux()[k]).sum::<f64>() / m)
        .collect();
    let peak = mean.iter().copied().fold(0.0, f64::max);
    let core: Vec<usize> = (0..len).filter(|&k| mean[k] >= 0.5 * peak).collect();
    let (lo, hi) = match (core.first(), core.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Input("records carry no flux".into())),
    };
    if hi - lo <= max_lag {
        return Err(Error::Input(format!(
            "stationary core spans {} samples, fewer than the requested lag {max_lag}",
            hi - lo
        )));
    }
    let mut lags = Vec::with_capacity(max_lag + 1);
    let mut g2 = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut acc = 0.0;
        let mut count = 0usize;
        for t in lo..=(hi - lag) {
            let cross = records.iter().map(|r| r.flux()[t] * r.flux()[t + lag]).sum::<f64>() / m;
            acc += cross / (mean[t] * mean[t + lag]);
            count += 1;
        }
        lags.push(lag as f64 * first.dt());
        g2.push(acc / count as f64);
    }
    let g1_abs: Vec<f64> = g2.iter().map(|g| (g - 1.0).max(0.0).sqrt()).collect();
    // Least squares for ln|g1| = -a tau^2 through the origin, restricted to
    // lags with a clear signal.
    let (mut num, mut den) = (0.0, 0.0);
    for (tau, g) in lags.iter().zip(&g1_abs).skip(1) {
        if *g > 0.1 && *g < 1.0 {
            let x = tau * tau;
            num += x * (-g.ln());
            den += x * x;
        }
    }
    if num <= 0.0 {
        return Err(Error::Input("field correlation has no decaying signal to fit".into()));
    }
    let a = num / den;
    Ok(FieldCorrelationProfile {
        lags,
        g2,
        g1_abs,
        half_width_1e: 1.0 / a.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{gaussian_envelope, DeterministicPulseSpec};

    #[test]
    fn deterministic_records_give_exactly_one() {
        let r = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 3e31, 180e-15)).unwrap();
        let recs = vec![r; 150];
        for n in 1..=6 {
            let g = correlation_diagnostic(&recs, n).unwrap();
            assert_eq!(g.value, 1.0);
            assert_eq!(g.stderr, 0.0);
        }
    }

    #[test]
    fn diagnostic_input_errors() {
        let r = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 3e31, 180e-15)).unwrap();
        assert!(correlation_diagnostic(&vec![r.clone(); 99], 2).is_err());
        assert!(matches!(correlation_diagnostic(&vec![r.clone(); 100], 7), Err(Error::Domain(_))));
        let other = gaussian_envelope(&DeterministicPulseSpec::new(30e-15, 3e31, 200e-15)).unwrap();
        let mut recs = vec![r; 100];
        recs.push(other);
        assert!(matches!(correlation_diagnostic(&recs, 2), Err(Error::Input(_))));
    }
}
