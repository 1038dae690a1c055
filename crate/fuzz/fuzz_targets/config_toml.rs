#![no_main]

use getzler::harness::{ConfigError, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    match RunConfig::from_toml(src) {
        Ok(cfg) => {
            assert!(cfg.samples > 0 && cfg.y_degree > 0 && cfg.j > 0 && cfg.op_bound >= 0);
            assert!(!cfg.suites.is_empty() && !cfg.kirillov.k.is_empty());
            cfg.kirillov.quadrature.validate().unwrap();
        }
        Err(ConfigError::Parse { line, column, .. }) => {
            assert!(line >= 1 && line <= src.lines().count().max(1) + 1);
            assert!(column >= 1);
        }
        Err(_) => {}
    }
});
