#![no_main]

use kleinian::export::RunExport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = RunExport::from_json(text) {
        let _ = doc.to_json();
        let _ = doc.presentation();
    }
});
