//! Configuration, check registry, and JSON reporting behind the `getzler` CLI.

pub mod checks;
pub mod config;
pub mod report;

use std::time::Instant;

pub use checks::{registry, Check, Outcome};
pub use config::{ConfigError, RunConfig, Suite};
pub use report::{Record, Report, Status};

/// Runs the selected checks in registry order. `only`, when non-empty,
/// restricts the run to those check ids.
pub fn run(cfg: &RunConfig, only: &[String]) -> Report {
    let mut records = Vec::new();
    for c in registry(cfg) {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let out = c.run(cfg);
        let timing_ms = start.elapsed().as_millis() as u64;
        let (status, witness) = match out {
            Outcome::Pass => (Status::Pass, None),
            Outcome::Fail(w) => (Status::Fail, Some(w)),
            Outcome::Inconclusive(w) => (Status::Inconclusive, Some(w)),
        };
        records.push(Record { check_id: c.id, anchor: c.anchor, status, witness, timing_ms });
    }
    Report::new(cfg.seed, records)
}

/// `(id, anchor)` for every check the config would run.
pub fn list_checks(cfg: &RunConfig) -> Vec<(String, String)> {
    registry(cfg).into_iter().map(|c| (c.id, c.anchor)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig { samples: 2, kirillov: config::KirillovSettings { k: vec![1], s: vec![0.2], ..Default::default() }, ..RunConfig::default() }
    }

    #[test]
    fn ids_are_unique() {
        let ids = list_checks(&RunConfig::default());
        let mut sorted: Vec<_> = ids.iter().map(|x| &x.0).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn quick_run_passes_and_is_deterministic() {
        let cfg = quick();
        let a = run(&cfg, &[]);
        let bad: Vec<_> = a.records.iter().filter(|r| r.status != Status::Pass).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        let b = run(&cfg, &[]);
        assert_eq!(a.without_timing().to_json(), b.without_timing().to_json());
    }

    #[test]
    fn op_bound_zero_is_inconclusive() {
        let cfg = RunConfig { suites: vec![Suite::Rescale], op_bound: 0, ..quick() };
        let r = run(&cfg, &["rescale.scaling_equals_taylor".to_string()]);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].status, Status::Inconclusive);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn kirillov_only_single_record() {
        let cfg = RunConfig::from_toml("suites = [\"kirillov\"]\n[kirillov]\nk = [2]\ns = [0.3]\n").unwrap();
        let r = run(&cfg, &[]);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].check_id, "kirillov.k2.s0.3");
        assert_eq!(r.exit_code(), 0);
    }
}
