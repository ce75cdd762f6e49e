#![no_main]

use std::str::FromStr;

use gsqg::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = RunConfig::from_str(text) {
        // Anything accepted must have passed validation.
        assert!(cfg.params.validate().is_ok());
        assert!(cfg.solve.validate().is_ok());
    }
});
