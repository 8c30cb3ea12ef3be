#![no_main]
use libfuzzer_sys::fuzz_target;

use ionkin_core::model::CrossSectionConfig;

fuzz_target!(|s: &str| {
    let _ = CrossSectionConfig::from_json_str(s);
});
