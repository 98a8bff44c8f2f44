#![no_main]

use libfuzzer_sys::fuzz_target;
use shc_sim::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let _ = cfg.validate();
        // the echo must parse back to the same config
        let again = ExperimentConfig::parse(&cfg.to_text()).expect("echo parses");
        assert_eq!(again, cfg);
    }
});
