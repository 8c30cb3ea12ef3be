#![no_main]
use libfuzzer_sys::fuzz_target;

use ionkin::io::parse_yields;

fuzz_target!(|s: &str| {
    let _ = parse_yields(s);
});
