#![allow(dead_code)]

use ionkin_core::model::{
    build_channel_table, Channel, ChannelTable, CrossSection, CrossSectionConfig, IonizationPotentialTable,
    SpeciesIndex,
};

pub const PHOTON_EV: f64 = 93.0;

pub fn neon_table() -> ChannelTable {
    build_channel_table(PHOTON_EV, &IonizationPotentialTable::neon(), &CrossSectionConfig::default()).unwrap()
}

/// Table with a lone `0 -> 1` channel of the given order.
pub fn lone_channel(order: u32, sigma: f64) -> ChannelTable {
    let ch = Channel {
        from: SpeciesIndex::new(0).unwrap(),
        to: SpeciesIndex::new(1).unwrap(),
        order,
        sigma: CrossSection::from_value(sigma).unwrap(),
        sequential: true,
        direct: true,
    };
    ChannelTable::custom(PHOTON_EV, vec![ch]).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
