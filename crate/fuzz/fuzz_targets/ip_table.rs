#![no_main]
use libfuzzer_sys::fuzz_target;

use ionkin_core::model::IonizationPotentialTable;

fuzz_target!(|s: &str| {
    let _ = IonizationPotentialTable::parse(s);
});
