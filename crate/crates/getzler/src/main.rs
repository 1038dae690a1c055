use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use getzler::harness::{self, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "getzler", version, about = "Run the rescaling-calculus verification suites")]
struct Cli {
    #[command(subcommand)]
    suite: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the JSON report; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Kirillov agreement bound.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Twist degree for the Kirillov check.
    #[arg(long, global = true)]
    k: Option<i64>,
    /// Lie parameter for the Kirillov check.
    #[arg(long, global = true, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Print check ids and exit.
    #[arg(long, global = true)]
    list_checks: bool,
    /// Run only this check id (repeatable).
    #[arg(long = "check", global = true)]
    checks: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    Algebra,
    Forms,
    Dnc,
    Rescale,
    Symbols,
    Mehler,
    Kirillov,
    All,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return usage(format!("{}: {e}", p.display())),
        },
        None => RunConfig::default(),
    };
    let only = match cli.suite {
        Cmd::All => None,
        Cmd::Algebra => Some(Suite::Algebra),
        Cmd::Forms => Some(Suite::Forms),
        Cmd::Dnc => Some(Suite::Dnc),
        Cmd::Rescale => Some(Suite::Rescale),
        Cmd::Symbols => Some(Suite::Symbols),
        Cmd::Mehler => Some(Suite::Mehler),
        Cmd::Kirillov => Some(Suite::Kirillov),
    };
    if let Some(s) = only {
        cfg.suites = vec![s];
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return usage("--tolerance must be positive");
        }
        cfg.kirillov.tolerance = t;
    }
    if let Some(k) = cli.k {
        if k < 0 {
            return usage("--k must be non-negative");
        }
        cfg.kirillov.k = vec![k];
    }
    if let Some(s) = cli.s {
        if !s.is_finite() {
            return usage("--s must be finite");
        }
        cfg.kirillov.s = vec![s];
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if cli.list_checks {
        for (id, anchor) in harness::list_checks(&cfg) {
            println!("{id}\t{anchor}");
        }
        return ExitCode::SUCCESS;
    }
    let known: Vec<String> = harness::list_checks(&cfg).into_iter().map(|c| c.0).collect();
    if let Some(bad) = cli.checks.iter().find(|c| !known.contains(c)) {
        return usage(format!("unknown check id `{bad}` (see --list-checks)"));
    }
    let report = harness::run(&cfg, &cli.checks);
    for r in &report.records {
        eprintln!("{:<13} {} ({} ms){}", format!("{:?}", r.status).to_uppercase(), r.check_id, r.timing_ms, r.witness.as_ref().map(|w| format!(": {w}")).unwrap_or_default());
    }
    let json = report.to_json();
    match &cfg.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                return usage(format!("cannot write {}: {e}", p.display()));
            }
        }
        None => println!("{json}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
