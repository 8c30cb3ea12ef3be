#![no_main]
use libfuzzer_sys::fuzz_target;

use ionkin::config::Config;

fuzz_target!(|s: &str| {
    let _ = Config::from_json_str(s);
});
