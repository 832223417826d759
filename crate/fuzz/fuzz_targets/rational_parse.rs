#![no_main]

use kleinian::field::{format_rational, parse_rational, FieldElement};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_rational(text) {
        assert_eq!(parse_rational(&format_rational(&q)).expect("round trip"), q);
    }
    let items: Vec<&str> = text.split(',').collect();
    if let Ok(e) = FieldElement::from_strings(&items) {
        assert_eq!(FieldElement::from_strings(&e.to_strings()).expect("round trip"), e);
    }
});
