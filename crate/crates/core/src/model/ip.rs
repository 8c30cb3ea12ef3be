use crate::error::{Error, Result};
use crate::model::NUM_TRANSITIONS;

const NEON_IP_DATA: &str = include_str!("../../data/ne_ip.txt");

/// Ionization potentials `ip[j]` (eV) for the transitions `j -> j+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IonizationPotentialTable {
    ip: [f64; NUM_TRANSITIONS],
}

impl IonizationPotentialTable {
    pub fn new(ip: [f64; NUM_TRANSITIONS]) -> Result<Self> {
        for (j, v) in ip.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!(
                    "ionization potential for j = {j} must be positive, got {v}"
                )));
            }
        }
        for j in 1..NUM_TRANSITIONS {
            if ip[j] <= ip[j - 1] {
                return Err(Error::Config(format!(
                    "ionization potentials must increase strictly: ip[{}] = {} <= ip[{}] = {}",
                    j,
                    ip[j],
                    j - 1,
                    ip[j - 1]
                )));
            }
        }
        Ok(Self { ip })
    }

    /// Neon values shipped with the crate (`data/ne_ip.txt`).
    pub fn neon() -> Self {
        Self::parse(NEON_IP_DATA).expect("shipped neon table is valid")
    }

    /// Parses the plain-text format: one `j  ip_eV` pair per line, `#`
    /// starts a comment, blank lines ignored. Every `j` in `0..8` must appear
    /// exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut slots: [Option<f64>; NUM_TRANSITIONS] = [None; NUM_TRANSITIONS];
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(js), Some(vs), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Config(format!(
                    "line {}: expected `j ip_eV`, got {:?}",
                    lineno + 1,
                    line
                )));
            };
            let j: usize = js
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad charge state {js:?}", lineno + 1)))?;
            let v: f64 = vs
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad energy {vs:?}", lineno + 1)))?;
            if j >= NUM_TRANSITIONS {
                return Err(Error::Config(format!(
                    "line {}: charge state {j} out of range 0..{}",
                    lineno + 1,
                    NUM_TRANSITIONS
                )));
            }
            if slots[j].replace(v).is_some() {
                return Err(Error::Config(format!("line {}: duplicate entry for j = {j}", lineno + 1)));
            }
        }
        let mut ip = [0.0; NUM_TRANSITIONS];
        for (j, slot) in slots.iter().enumerate() {
            ip[j] = slot.ok_or_else(|| {
                Error::Config(format!("table has no entry for j = {j} (need exactly {NUM_TRANSITIONS})"))
            })?;
        }
        Self::new(ip)
    }

    pub fn get(&self, j: usize) -> f64 {
        self.ip[j]
    }

    pub fn as_array(&self) -> &[f64; NUM_TRANSITIONS] {
        &self.ip
    }

    /// Energy needed to go from charge state `from` to `to`.
    pub fn cumulative(&self, from: usize, to: usize) -> f64 {
        self.ip[from..to].iter().sum()
    }
}
