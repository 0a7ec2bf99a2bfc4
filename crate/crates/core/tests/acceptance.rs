//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so that every line is printed; the
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use freestable::checks::{self, CheckCase};
use freestable::dist::{mellin_cf, FreeStable};
use freestable::params::make_params;
use freestable::Complex;

struct Outcome {
    ok: bool,
    summary: String,
}

fn from_cases(cases: &[CheckCase]) -> Outcome {
    let failed: Vec<&CheckCase> = cases.iter().filter(|c| !c.pass).collect();
    let worst = cases
        .iter()
        .map(|c| c.metric / c.tolerance)
        .fold(0.0, f64::max);
    let mut summary = format!(
        "{} cases, worst metric/tolerance {:.2e}",
        cases.len(),
        worst
    );
    for c in failed.iter().take(5) {
        summary.push_str(&format!(
            "\n      failed {}: {:.3e} > {:.0e} ({})",
            c.id, c.metric, c.tolerance, c.details
        ));
    }
    Outcome {
        ok: failed.is_empty() && !cases.is_empty(),
        summary,
    }
}

fn criterion(
    results: &mut Vec<bool>,
    number: usize,
    name: &str,
    limit: Option<Duration>,
    run: impl FnOnce() -> Outcome,
) {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let ok = out.ok && in_time;
    let limit_text = limit.map_or(String::new(), |l| format!(", limit {:.0} s", l.as_secs_f64()));
    println!(
        "[{}] {:>2}. {}: {} ({:.2} s{}{})",
        if ok { "PASS" } else { "FAIL" },
        number,
        name,
        out.summary,
        elapsed.as_secs_f64(),
        limit_text,
        if in_time { "" } else { ", over time" }
    );
    results.push(ok);
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn main() {
    let grid = checks::standard_grid();
    let seed = 42;
    let n_mc = 100_000;
    let mut results = Vec::new();

    criterion(&mut results, 1, "semicircle recovery", secs(1), || {
        let d = FreeStable::new(make_params(2.0, 0.5).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=200 {
            let x = -2.5 + 5.0 * k as f64 / 200.0;
            let exact = if x.abs() < 2.0 {
                (4.0 - x * x).sqrt() / (2.0 * PI)
            } else {
                0.0
            };
            worst = worst.max((d.pdf(x).unwrap() - exact).abs());
        }
        Outcome {
            ok: worst <= 1e-10,
            summary: format!("max abs error {worst:.2e} on 201 points, tolerance 1e-10"),
        }
    });

    criterion(&mut results, 2, "positive 1/2-stable closed form", secs(1), || {
        let d = FreeStable::new(make_params(0.5, 1.0).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        let (a, b) = (0.26f64.ln(), 1e3f64.ln());
        for k in 0..=200 {
            let y = (a + (b - a) * k as f64 / 200.0).exp();
            let exact = (4.0 * y - 1.0).sqrt() / (2.0 * PI * y * y);
            worst = worst.max((d.pdf(y).unwrap() - exact).abs() / exact);
        }
        Outcome {
            ok: worst <= 1e-9,
            summary: format!("max rel error {worst:.2e} on 201 points, tolerance 1e-9"),
        }
    });

    criterion(&mut results, 3, "series vs inversion oracle", secs(30), || {
        let cases: Vec<CheckCase> = grid.iter().map(checks::check_methods).collect();
        from_cases(&cases)
    });

    criterion(&mut results, 4, "duality", secs(10), || {
        let xs: Vec<f64> = (0..101)
            .map(|k| (0.01f64.ln() + (1e4f64).ln() * k as f64 / 100.0).exp())
            .collect();
        let mut cases: Vec<CheckCase> = grid
            .iter()
            .filter_map(|p| checks::check_duality(p, &xs))
            .collect();
        cases.push(checks::check_duality_closed_form());
        from_cases(&cases)
    });

    criterion(&mut results, 5, "positive mass and normalization", secs(30), || {
        let cases: Vec<CheckCase> = grid.iter().flat_map(checks::check_positivity).collect();
        from_cases(&cases)
    });

    criterion(&mut results, 6, "Mellin closed forms", None, || {
        let mut cases: Vec<CheckCase> = Vec::new();
        for p in &grid {
            cases.push(checks::check_mellin_quadrature(p));
            cases.push(checks::check_factorization_mellin(p));
        }
        cases.push(checks::check_semicircle_moment());
        from_cases(&cases)
    });

    criterion(&mut results, 7, "characteristic function consistency", None, || {
        let mut cases: Vec<CheckCase> = grid.iter().map(checks::check_cf_consistency).collect();
        cases.push(checks::check_cf_bessel());
        from_cases(&cases)
    });

    criterion(&mut results, 8, "Mellin transform of the cf", None, || {
        let mut cases = Vec::new();
        for a in [1.5, 2.0] {
            let p = make_params(a, 0.5).unwrap();
            cases.extend(checks::check_mellin_cf(&p, &[0.25, 0.5, 0.75]));
        }
        // the alpha = 2, s = 1 value is exactly one
        let one = mellin_cf(&make_params(2.0, 0.5).unwrap(), Complex::new(1.0, 0.0)).unwrap();
        let mut out = from_cases(&cases);
        out.ok &= (one.re - 1.0).abs() < 1e-14 && one.im.abs() < 1e-14;
        out
    });

    criterion(&mut results, 9, "Monte Carlo identities", secs(180), || {
        let mut cases = Vec::new();
        for (a, r) in [(0.5, 1.0), (2.0, 0.5)] {
            let p = make_params(a, r).unwrap();
            cases.push(checks::check_classical_sampler(&p, n_mc, seed));
        }
        let p1 = make_params(0.6, 0.4).unwrap();
        let p2 = make_params(0.6, 0.8).unwrap();
        cases.extend(checks::check_ratio_identity(&p1, &p2, n_mc, seed));
        let pc = make_params(0.5, 0.5).unwrap();
        cases.extend(checks::check_cauchy_mc(&pc, n_mc, seed));
        from_cases(&cases)
    });

    criterion(&mut results, 10, "density at the origin", None, || {
        let cases: Vec<CheckCase> = checks::psi0_pairs().iter().map(checks::check_psi0).collect();
        from_cases(&cases)
    });

    criterion(&mut results, 11, "full check suite via the CLI", secs(300), || {
        let out = Command::new(env!("CARGO_BIN_EXE_freestable"))
            .args(["check", "--suite", "all", "--seed", "42"])
            .output()
            .expect("binary runs");
        let code = out.status.code().unwrap_or(-1);
        let report: serde_json::Value =
            serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
        let n = report["cases"].as_array().map_or(0, Vec::len);
        Outcome {
            ok: code == 0 && report["pass"] == serde_json::Value::Bool(true),
            summary: format!("exit code {code}, {n} cases"),
        }
    });

    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
