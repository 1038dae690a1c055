//! Acceptance criteria, one line each. Runs as a plain binary so the lines show
//! up in `cargo test` output; exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use getzler::harness::checks::{self, rng_for, Outcome, WittenCase};
use getzler::kirillov::{self, QuadratureConfig};

const SEED: u64 = 0x5eed;

struct Line {
    n: usize,
    name: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
}

fn outcome(o: Outcome) -> Result<(), String> {
    match o {
        Outcome::Pass => Ok(()),
        Outcome::Fail(w) => Err(format!("fail: {w}")),
        Outcome::Inconclusive(w) => Err(format!("inconclusive: {w}")),
    }
}

fn all(parts: Vec<(&str, Outcome)>) -> Result<(), String> {
    for (name, o) in parts {
        outcome(o).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn timed(n: usize, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> Line {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let (mut ok, mut detail) = match res {
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    if let Some(b) = budget {
        if elapsed > b {
            ok = false;
            detail = format!("{detail}; over the {} s budget", b.as_secs());
        }
    }
    Line { n, name, ok, detail, elapsed }
}

fn kirillov_grid(ks: &[i64], ss: &[f64], tol: f64) -> Result<String, String> {
    let q = QuadratureConfig { tolerance: tol.min(1e-8), ..QuadratureConfig::default() };
    let mut worst: f64 = 0.0;
    for &k in ks {
        for &s in ss {
            let r = kirillov::kirillov_check(k, s, &q).map_err(|e| format!("k = {k}, s = {s}: {e}"))?;
            if r.diff >= tol {
                return Err(format!("k = {k}, s = {s}: integral {} vs character {}, |diff| = {:e}", r.lhs, r.rhs, r.diff));
            }
            worst = worst.max(r.diff);
        }
    }
    Ok(format!("max |diff| = {worst:.1e} < {tol:e}"))
}

fn sweep_csv() -> Result<String, String> {
    let q = QuadratureConfig::default();
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("kirillov_sweep.csv");
    let rows = kirillov::sweep(2, 0.0, 1.0, 50, &q).map_err(|e| e.to_string())?;
    checks::write_sweep_csv(&path, &rows)?;
    match rows.iter().find(|r| r.diff >= 1e-6) {
        None => Ok(format!("sweep over [0, 1] agrees everywhere, csv at {}", path.display())),
        Some(r) => Ok(format!("sweep degrades at s = {} (|diff| = {:e}), csv at {}", r.s, r.diff, path.display())),
    }
}

fn main() {
    let rng = |id: &str| rng_for(SEED, id);
    let mut lines = Vec::new();

    lines.push(timed(1, "Kirillov at s = 0, k = 0..3, |lhs - rhs| < 1e-8", Some(Duration::from_secs(60)), || kirillov_grid(&[0, 1, 2, 3], &[0.0], 1e-8)));
    lines.push(timed(2, "Kirillov equivariant, k = 0..2, s in {0.1, 0.3, 0.5}, < 1e-6", None, || {
        let grid = kirillov_grid(&[0, 1, 2], &[0.1, 0.3, 0.5], 1e-6)?;
        Ok(format!("{grid}; {}", sweep_csv()?))
    }));
    lines.push(timed(3, "Mehler heat residual exactly 0, 20 models, n in {2, 4}, J in {1, 2}", Some(Duration::from_secs(300)), || {
        outcome(checks::heat_equation(&mut rng("heat"), 20, &[2, 4], 2)).map(|_| "20 models".into())
    }));
    lines.push(timed(4, "kernel supertrace at one equals (2 pi i)^(-n/2) [A-hat Ch]_top, n = 2", None, || {
        outcome(checks::kernel_supertrace(&mut rng("supertrace"), 10, 2)).map(|_| "10 models".into())
    }));
    lines.push(timed(5, "o_sc = o_t on 200 sections; action and composition order bounds on 200 pairs", None, || {
        all(vec![
            ("o_sc = o_t", checks::scaling_equals_taylor(&mut rng("orders"), 200, 4, 6)),
            ("o_sc(Ds) >= o_sc(s) - o_g(D)", checks::action_monotonicity(&mut rng("action"), 200, 3, 6)),
            ("o_g(D1 D2) <= o_g(D1) + o_g(D2)", checks::composition_subadditive(&mut rng("compose"), 200)),
        ])
        .map(|_| "all exact".into())
    }));
    lines.push(timed(6, "generator symbols agree with zero-fiber evaluation, 50 generators", None, || {
        outcome(checks::generator_symbols(&mut rng("symbols"), 50)).map(|_| "nabla, Clifford, X-multiplication".into())
    }));
    lines.push(timed(7, "flat-chart Dirac identities exact (anticommutator, Lichnerowicz at u and 1/4, d theta = -2 mu)", None, || {
        outcome(checks::dirac_identities(&mut rng("dirac"), 10)).map(|_| "rotation chart and 10 random charts".into())
    }));
    lines.push(timed(8, "DNC characters: homomorphism, flow factorization, Euler-like, continuity", Some(Duration::from_secs(30)), || {
        all(vec![
            ("homomorphism", checks::dnc_homomorphism(&mut rng("dnc"), 200)),
            ("exp factorization", checks::dnc_exp_factorization(5)),
            ("Euler-like", checks::dnc_euler_like(&mut rng("euler"), 50)),
            ("spectral continuity", checks::dnc_spectral_continuity(5)),
        ])
        .map(|_| "all exact".into())
    }));
    lines.push(timed(9, "t^-n str has no poles and Berezin zero-fiber value, 50 sections", None, || {
        outcome(checks::str_reduction(&mut rng("str"), 50, 2)).map(|_| "50 sections".into())
    }));
    lines.push(timed(10, "Witten/Novikov membership: f = y1^2 and 2 y1 dy1 in, f = y1 out with witness", None, || {
        all(vec![
            ("f = y1^2", checks::witten_case(WittenCase::Quadratic)),
            ("omega = 2 y1 dy1", checks::witten_case(WittenCase::ClosedForm)),
            ("f = y1", checks::witten_case(WittenCase::Counterexample)),
        ])
        .map(|_| "as expected".into())
    }));

    let mut failed = 0;
    for l in &lines {
        if !l.ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {} [{:.2} s] {}", l.n, if l.ok { "PASS" } else { "FAIL" }, l.name, l.elapsed.as_secs_f64(), l.detail);
    }
    println!("acceptance: {} passed, {} failed", lines.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
