#![no_main]

use kleinian::export::parse_off_counts;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_off_counts(text);
    }
});
