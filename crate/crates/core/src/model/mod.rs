//! Species ladder, ionization channels and generalized cross sections.

mod channel;
mod cross_section;
mod ip;
mod validity;

use std::fmt;

pub use channel::{build_channel_table, ln_factorial, min_photon_order, Channel, ChannelTable};
pub use cross_section::{scale_cross_section, CrossSection, CrossSectionConfig};
pub use ip::IonizationPotentialTable;
pub use validity::{
    check_lopt_validity, ponderomotive_energy_ev, ValidityReport, MAX_PONDEROMOTIVE_RATIO, MIN_FIELD_CYCLES,
};

use crate::error::{Error, Result};

/// Number of charge states, neutral through fully stripped L shell (Ne⁸⁺).
pub const NUM_SPECIES: usize = 9;
/// Number of single-step transitions on the ladder.
pub const NUM_TRANSITIONS: usize = NUM_SPECIES - 1;

/// Charge state `j` in `0..=8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesIndex(u8);

impl SpeciesIndex {
    pub const NEUTRAL: SpeciesIndex = SpeciesIndex(0);

    pub fn new(j: usize) -> Result<Self> {
        if j < NUM_SPECIES {
            Ok(Self(j as u8))
        } else {
            Err(Error::Domain(format!("charge state {j} outside 0..={}", NUM_SPECIES - 1)))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = SpeciesIndex> {
        (0..NUM_SPECIES as u8).map(SpeciesIndex)
    }

    /// Label such as `Ne`, `Ne+`, `Ne3+`.
    pub fn label(self) -> String {
        match self.0 {
            0 => "Ne".to_string(),
            1 => "Ne+".to_string(),
            j => format!("Ne{j}+"),
        }
    }

    /// Accepts `3`, `Ne3+`, `Ne+3`, `Ne+`, `Ne`.
    pub fn parse_label(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(j) = s.parse::<usize>() {
            return Self::new(j);
        }
        let rest = s
            .strip_prefix("Ne")
            .ok_or_else(|| Error::Input(format!("unrecognized species label {s:?}")))?;
        let j = match rest {
            "" => 0,
            "+" => 1,
            r => {
                let digits = r
                    .strip_prefix('+')
                    .or_else(|| r.strip_suffix('+'))
                    .ok_or_else(|| Error::Input(format!("unrecognized species label {s:?}")))?;
                digits
                    .parse::<usize>()
                    .map_err(|_| Error::Input(format!("unrecognized species label {s:?}")))?
            }
        };
        Self::new(j).map_err(|e| Error::Input(e.to_string()))
    }
}

impl fmt::Display for SpeciesIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn species_bounds_and_labels() {
        assert!(SpeciesIndex::new(9).is_err());
        assert_eq!(SpeciesIndex::all().count(), 9);
        for s in SpeciesIndex::all() {
            assert_eq!(SpeciesIndex::parse_label(&s.label()).unwrap(), s);
        }
        assert_eq!(SpeciesIndex::parse_label("Ne+3").unwrap().get(), 3);
        assert_eq!(SpeciesIndex::parse_label("7").unwrap().get(), 7);
        assert!(SpeciesIndex::parse_label("Ar+").is_err());
        assert!(SpeciesIndex::parse_label("Ne9+").is_err());
        assert!(SpeciesIndex::parse_label("Ne++").is_err());
    }
}
