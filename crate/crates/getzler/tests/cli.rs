use std::process::Command;

use getzler::harness::{Report, Status};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_getzler"))
}

fn write_config(name: &str, body: &str) -> std::path::PathBuf {
    let p = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn kirillov_single_record() {
    let out = bin().args(["kirillov", "--k", "2", "--s", "0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.records[0].status, Status::Pass);
}

#[test]
fn op_bound_zero_exits_nonzero() {
    let cfg = write_config("op0.toml", "op_bound = 0\nsamples = 5\n");
    let out = bin().args(["rescale", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let r = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(r.records.iter().any(|x| x.status == Status::Inconclusive));
}

#[test]
fn config_and_usage_errors_exit_two() {
    let cfg = write_config("bad.toml", "seed = 3\n\n[kirillov]\ntolerance = -1.0\n");
    let out = bin().args(["all", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("4:") && err.contains("kirillov.tolerance"), "{err}");
    assert_eq!(bin().arg("nope").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["dnc", "--check", "dnc.nope"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn report_file_is_deterministic() {
    let mut reports = Vec::new();
    for i in 0..2 {
        let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("dnc{i}.json"));
        let out = bin().args(["dnc", "--seed", "11", "--out"]).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        reports.push(Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap().without_timing());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn list_checks_names_every_suite() {
    let out = bin().args(["all", "--list-checks"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for s in ["algebra.", "forms.", "dnc.", "rescale.", "symbols.", "mehler.", "kirillov."] {
        assert!(text.contains(s), "{s}");
    }
}
