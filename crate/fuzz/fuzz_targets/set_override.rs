#![no_main]

use libfuzzer_sys::fuzz_target;
use shc_sim::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut cfg = ExperimentConfig::default();
    for assignment in text.split('\n') {
        if cfg.apply_override(assignment).is_err() {
            return;
        }
    }
    let _ = cfg.validate();
    assert_eq!(ExperimentConfig::parse(&cfg.to_text()).expect("echo parses"), cfg);
});
