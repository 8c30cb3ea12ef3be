use crate::error::{Error, Result};
use crate::model::cross_section::{CrossSection, CrossSectionConfig};
use crate::model::ip::IonizationPotentialTable;
use crate::model::{SpeciesIndex, NUM_SPECIES, NUM_TRANSITIONS};

/// Smallest photon count `n` with `n * photon_energy >= energy_required`.
pub fn min_photon_order(energy_required: f64, photon_energy: f64) -> Result<u32> {
    if !(energy_required > 0.0 && energy_required.is_finite()) {
        return Err(Error::Domain(format!("required energy must be positive, got {energy_required}")));
    }
    if !(photon_energy > 0.0 && photon_energy.is_finite()) {
        return Err(Error::Domain(format!("photon energy must be positive, got {photon_energy}")));
    }
    let mut n = (energy_required / photon_energy).ceil();
    // Guard against the quotient rounding across an integer.
    if (n - 1.0) * photon_energy >= energy_required {
        n -= 1.0;
    } else if n * photon_energy < energy_required {
        n += 1.0;
    }
    if n > u32::MAX as f64 {
        return Err(Error::Domain("photon order overflows".into()));
    }
    Ok(n.max(1.0) as u32)
}

/// One ionization pathway `from -> to` absorbing `order` photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub from: SpeciesIndex,
    pub to: SpeciesIndex,
    pub order: u32,
    pub sigma: CrossSection,
    /// Part of the stepwise ladder (`to = from + 1`).
    pub sequential: bool,
    /// Direct multi-electron ejection from the neutral. The `0 -> 1` channel
    /// carries both flags.
    pub direct: bool,
}

impl Channel {
    pub fn electrons(&self) -> u32 {
        (self.to.get() - self.from.get()) as u32
    }
}

/// Set of ionization channels at one photon energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    photon_energy: f64,
    channels: Vec<Channel>,
    enhancement_applied: bool,
}

impl ChannelTable {
    /// Builds a table from an arbitrary channel list, checking the generic
    /// invariants (upward transitions, `order >= electrons`, no duplicate
    /// pairs). Used for isolated-channel studies; [`build_channel_table`]
    /// produces the full ladder.
    pub fn custom(photon_energy: f64, channels: Vec<Channel>) -> Result<Self> {
        if !(photon_energy > 0.0 && photon_energy.is_finite()) {
            return Err(Error::Config(format!("photon energy must be positive, got {photon_energy}")));
        }
        for (i, c) in channels.iter().enumerate() {
            if c.to <= c.from {
                return Err(Error::Config(format!(
                    "channel {} -> {} does not increase the charge",
                    c.from, c.to
                )));
            }
            if c.order < c.electrons() {
                return Err(Error::Config(format!(
                    "channel {} -> {}: {} photons cannot eject {} uncorrelated electrons",
                    c.from,
                    c.to,
                    c.order,
                    c.electrons()
                )));
            }
            if c.sequential && c.electrons() != 1 {
                return Err(Error::Config(format!(
                    "channel {} -> {} flagged sequential but ejects {} electrons",
                    c.from,
                    c.to,
                    c.electrons()
                )));
            }
            if c.direct && c.from.get() != 0 {
                return Err(Error::Config(format!(
                    "direct channel {} -> {} must start from the neutral",
                    c.from, c.to
                )));
            }
            if !c.sequential && !c.direct {
                return Err(Error::Config(format!(
                    "channel {} -> {} is neither sequential nor direct",
                    c.from, c.to
                )));
            }
            if channels[..i].iter().any(|o| o.from == c.from && o.to == c.to) {
                return Err(Error::Config(format!("duplicate channel {} -> {}", c.from, c.to)));
            }
        }
        Ok(Self {
            photon_energy,
            channels,
            enhancement_applied: false,
        })
    }

    pub fn photon_energy(&self) -> f64 {
        self.photon_energy
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn enhancement_applied(&self) -> bool {
        self.enhancement_applied
    }

    pub fn get(&self, from: usize, to: usize) -> Option<&Channel> {
        self.channels
            .iter()
            .find(|c| c.from.get() == from && c.to.get() == to)
    }

    pub fn sequential(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.sequential)
    }

    pub fn direct(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.direct)
    }

    /// Replaces the cross section of an existing channel.
    pub fn set_sigma(&mut self, from: usize, to: usize, sigma: CrossSection) -> Result<()> {
        let c = self
            .channels
            .iter_mut()
            .find(|c| c.from.get() == from && c.to.get() == to)
            .ok_or_else(|| Error::Config(format!("no channel {from} -> {to} in table")))?;
        c.sigma = sigma;
        Ok(())
    }

    /// Copy of the table with every direct multi-electron channel closed.
    pub fn with_direct_closed(&self) -> Self {
        let mut t = self.clone();
        for c in t.channels.iter_mut() {
            if c.direct && !c.sequential {
                c.sigma = CrossSection::ZERO;
            }
        }
        t
    }

    /// Checks every channel against the energetic threshold
    /// `order * photon_energy >= sum of traversed ionization potentials`.
    pub fn check_energetics(&self, ips: &IonizationPotentialTable) -> Result<()> {
        for c in &self.channels {
            let need = ips.cumulative(c.from.get(), c.to.get());
            if (c.order as f64) * self.photon_energy < need {
                return Err(Error::Config(format!(
                    "channel {} -> {}: {} photons of {} eV cannot supply {} eV",
                    c.from, c.to, c.order, self.photon_energy, need
                )));
            }
        }
        Ok(())
    }

    /// Multiplies every cross section by `order!`, the chaotic-light moment
    /// `<F^n> = n! <F>^n` folded into a deterministic envelope.
    pub fn apply_factorial_enhancement(&self) -> Result<Self> {
        if self.enhancement_applied {
            return Err(Error::State("factorial enhancement already applied to this table".into()));
        }
        let mut t = self.clone();
        for c in t.channels.iter_mut() {
            c.sigma = CrossSection::from_ln(c.sigma.ln() + ln_factorial(c.order))?;
        }
        t.enhancement_applied = true;
        Ok(t)
    }
}

/// `ln(n!)`, exact to rounding for the photon orders used here.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        let mut f: u64 = 1;
        for k in 2..=n as u64 {
            f *= k;
        }
        (f as f64).ln()
    } else {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }
}

/// Builds the sequential ladder `j -> j+1` and the direct channels `0 -> j`.
///
/// Sequential orders are the energetic minimum for one ionization potential;
/// direct orders are the energetic minimum for the summed potentials, raised
/// to the electron count when fewer photons would otherwise suffice. The
/// `0 -> 1` channel is stored once with both flags.
pub fn build_channel_table(
    photon_energy: f64,
    ips: &IonizationPotentialTable,
    sigma_source: &CrossSectionConfig,
) -> Result<ChannelTable> {
    if !(photon_energy > 0.0 && photon_energy.is_finite()) {
        return Err(Error::Config(format!("photon energy must be positive, got {photon_energy}")));
    }
    let mut channels = Vec::with_capacity(2 * NUM_TRANSITIONS - 1);
    for j in 0..NUM_TRANSITIONS {
        let order = min_photon_order(ips.get(j), photon_energy)?;
        channels.push(Channel {
            from: SpeciesIndex::new(j)?,
            to: SpeciesIndex::new(j + 1)?,
            order,
            sigma: sigma_source.sigma_for_order(order)?,
            sequential: true,
            direct: j == 0,
        });
    }
    for j in 2..NUM_SPECIES {
        let energetic = min_photon_order(ips.cumulative(0, j), photon_energy)?;
        let order = energetic.max(j as u32);
        channels.push(Channel {
            from: SpeciesIndex::NEUTRAL,
            to: SpeciesIndex::new(j)?,
            order,
            sigma: sigma_source.sigma_for_order(order)?,
            sequential: false,
            direct: true,
        });
    }
    for (&(from, to), &sigma) in &sigma_source.overrides {
        let c = channels
            .iter_mut()
            .find(|c| c.from.get() == from && c.to.get() == to)
            .ok_or_else(|| Error::Config(format!("override for unknown channel {from}-{to}")))?;
        c.sigma = sigma;
    }
    let table = ChannelTable::custom(photon_energy, channels)?;
    table.check_energetics(ips)?;
    Ok(table)
}
