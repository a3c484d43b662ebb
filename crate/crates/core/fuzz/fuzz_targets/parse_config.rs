#![no_main]

use libfuzzer_sys::fuzz_target;
use zeno_cavity::config::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = parse_config(data) {
        assert!(cfg.params.validate().is_ok());
        assert!(cfg.t_end > 0.0 && cfg.samples >= 2);
    }
});
