#![no_main]

use homlab::io::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            let _ = cfg.couples_spec();
            let _ = cfg.effective_method();
        }
    }
});
