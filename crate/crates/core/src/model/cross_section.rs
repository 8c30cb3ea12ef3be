use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};

/// A generalized cross section, stored as its natural logarithm.
///
/// Orders up to 11 reach values near 1e-348 in cgs units, below the
/// smallest positive `f64`, so the linear value is only materialized on
/// demand. A closed channel is represented by `ln = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CrossSection {
    ln: f64,
}

impl CrossSection {
    pub const ZERO: CrossSection = CrossSection { ln: f64::NEG_INFINITY };

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 0.0 {
            return Ok(Self::ZERO);
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("cross section must be positive and finite, got {v}")));
        }
        Ok(Self { ln: v.ln() })
    }

    pub fn from_ln(ln: f64) -> Result<Self> {
        if ln.is_nan() || ln == f64::INFINITY {
            return Err(Error::Domain(format!("invalid log cross section {ln}")));
        }
        Ok(Self { ln })
    }

    /// Parses decimal scientific notation without going through `f64`, so
    /// that values such as `"1e-348"` survive.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(p) => (&s[..p], &s[p + 1..]),
            None => (s, "0"),
        };
        let m: f64 = mant
            .parse()
            .map_err(|_| Error::Config(format!("bad cross-section mantissa in {s:?}")))?;
        let e: i32 = exp
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::Config(format!("bad cross-section exponent in {s:?}")))?;
        if m == 0.0 {
            return Ok(Self::ZERO);
        }
        if !(m.is_finite() && m > 0.0) || e.unsigned_abs() > 100_000 {
            return Err(Error::Config(format!("cross section must be positive, got {s:?}")));
        }
        Ok(Self {
            ln: m.ln() + e as f64 * std::f64::consts::LN_10,
        })
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Linear value; underflows to zero below the `f64` range.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// Multiplies by a positive dimensionless factor.
    pub fn scaled_by(&self, factor: f64) -> Self {
        Self {
            ln: self.ln + factor.ln(),
        }
    }
}

impl fmt::Display for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let l = self.log10();
        let e = l.floor();
        let m = 10f64.powf(l - e);
        write!(f, "{m:.6}e{}", e as i64)
    }
}

/// Raises `sigma_ref` of photon order `ref_order` to `target_order` by one
/// factor of `kappa` (cm² s) per extra photon.
pub fn scale_cross_section(
    sigma_ref: CrossSection,
    ref_order: u32,
    target_order: u32,
    kappa: CrossSection,
) -> Result<CrossSection> {
    if ref_order < 1 || target_order < ref_order {
        return Err(Error::Domain(format!(
            "cannot scale a cross section from order {ref_order} down to order {target_order}"
        )));
    }
    if sigma_ref.is_zero() || kappa.is_zero() {
        return Err(Error::Domain("scaling needs positive sigma_ref and kappa".into()));
    }
    let extra = (target_order - ref_order) as f64;
    CrossSection::from_ln(sigma_ref.ln + extra * kappa.ln)
}

/// Sources for channel cross sections.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionConfig {
    /// One-photon cross section, cm².
    pub sigma1: CrossSection,
    /// Two-photon generalized cross section, cm⁴ s.
    pub sigma2: CrossSection,
    /// Scaling factor per extra photon above order two, cm² s.
    pub kappa: CrossSection,
    /// Explicit values keyed by `(from, to)`, in the units of that channel's
    /// order. Zero closes a channel.
    pub overrides: BTreeMap<(usize, usize), CrossSection>,
}

impl Default for CrossSectionConfig {
    fn default() -> Self {
        Self {
            sigma1: CrossSection::parse("1e-18").unwrap(),
            sigma2: CrossSection::parse("1e-51").unwrap(),
            kappa: CrossSection::parse("1e-33").unwrap(),
            overrides: BTreeMap::new(),
        }
    }
}

impl CrossSectionConfig {
    /// n-photon one-electron value: explicit for orders 1 and 2, scaled from
    /// the two-photon value above that. Direct multi-electron channels use
    /// the same value for the same photon order.
    pub fn sigma_for_order(&self, order: u32) -> Result<CrossSection> {
        match order {
            0 => Err(Error::Domain("photon order must be at least 1".into())),
            1 => Ok(self.sigma1),
            2 => Ok(self.sigma2),
            n => scale_cross_section(self.sigma2, 2, n, self.kappa),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("cross-section config is not valid JSON: {e}")))?;
        Self::from_json(&v)
    }

    /// Reads `{"sigma1_cm2": .., "sigma2_cm4s": .., "kappa_cm2s": ..,
    /// "overrides": {"0-3": ..}}`; `"from-to"` keys are also accepted at the
    /// top level. Missing keys keep their defaults; unknown keys are errors.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("cross-section config must be a JSON object".into()))?;
        let mut cfg = Self::default();
        for (key, val) in obj {
            match key.as_str() {
                "sigma1_cm2" => cfg.sigma1 = positive_value(key, val)?,
                "sigma2_cm4s" => cfg.sigma2 = positive_value(key, val)?,
                "kappa_cm2s" => cfg.kappa = positive_value(key, val)?,
                "overrides" => {
                    let inner = val
                        .as_object()
                        .ok_or_else(|| Error::Config("`overrides` must be an object".into()))?;
                    for (k, x) in inner {
                        cfg.insert_override(k, x)?;
                    }
                }
                k if parse_channel_key(k).is_some() => cfg.insert_override(k, val)?,
                other => {
                    return Err(Error::Config(format!("unknown cross-section key {other:?}")));
                }
            }
        }
        Ok(cfg)
    }

    fn insert_override(&mut self, key: &str, val: &Value) -> Result<()> {
        let pair = parse_channel_key(key)
            .ok_or_else(|| Error::Config(format!("override key {key:?} is not of the form \"from-to\"")))?;
        let sigma = json_cross_section(key, val)?;
        if self.overrides.insert(pair, sigma).is_some() {
            return Err(Error::Config(format!("duplicate override for channel {key}")));
        }
        Ok(())
    }
}

fn parse_channel_key(k: &str) -> Option<(usize, usize)> {
    let (a, b) = k.split_once('-')?;
    let from = a.trim().parse().ok()?;
    let to = b.trim().parse().ok()?;
    Some((from, to))
}

fn json_cross_section(key: &str, v: &Value) -> Result<CrossSection> {
    match v {
        Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| Error::Config(format!("{key}: number out of range")))?;
            CrossSection::from_value(x).map_err(|e| Error::Config(format!("{key}: {e}")))
        }
        Value::String(s) => CrossSection::parse(s).map_err(|e| Error::Config(format!("{key}: {e}"))),
        _ => Err(Error::Config(format!("{key}: expected a number or a numeric string"))),
    }
}

fn positive_value(key: &str, v: &Value) -> Result<CrossSection> {
    let s = json_cross_section(key, v)?;
    if s.is_zero() {
        return Err(Error::Config(format!("{key} must be positive")));
    }
    Ok(s)
}
