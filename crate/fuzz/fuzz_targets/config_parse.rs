#![no_main]

use kleinian::config::JobConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = JobConfig::parse(text) {
        let again = JobConfig::parse(&cfg.to_toml().expect("serializable")).expect("round trip");
        assert_eq!(cfg, again);
        let _ = cfg.field_spec();
    }
});
