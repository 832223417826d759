#![no_main]

use kleinian::export::{parse_presentation, word_text, parse_word};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_presentation(text) {
        for rel in &p.relations {
            assert_eq!(&parse_word(&word_text(rel), p.generators).expect("round trip"), rel);
        }
    }
});
