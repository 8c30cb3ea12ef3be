#![no_main]
use libfuzzer_sys::fuzz_target;

use ionkin::io::parse_histogram;

fuzz_target!(|s: &str| {
    let _ = parse_histogram(s);
});
