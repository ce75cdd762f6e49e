#![no_main]

use gsqg::io::vstate_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(stored) = vstate_from_json(text) {
        for shape in &stored.state.shapes {
            assert!(shape.validate().is_ok());
        }
    }
});
