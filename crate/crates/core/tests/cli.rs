use std::process::{Command, Output};

fn freestable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freestable"))
        .args(args)
        .env_remove("FREESTABLE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("golden file exists")
}

#[test]
fn pdf_golden() {
    let o = freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("pdf_semicircle.csv"));
}

#[test]
fn cdf_golden() {
    let o = freestable(&["cdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "5"]);
    assert_eq!(stdout(&o), golden("cdf_semicircle.csv"));
}

#[test]
fn mellin_golden() {
    let o = freestable(&[
        "mellin", "--alpha", "0.5", "--rho", "1", "--min", "-0.5", "--max", "0.25", "--n", "4",
    ]);
    assert_eq!(stdout(&o), golden("mellin_positive_half.csv"));
    let o = freestable(&["mellin", "--alpha", "0.5", "--rho", "1", "--s", "0"]);
    assert_eq!(stdout(&o), "s,mellin_re,mellin_im\n0,1,0\n");
}

#[test]
fn cf_header_and_origin() {
    let o = freestable(&["cf", "--alpha", "1.5", "--rho", "0.5", "--min", "0", "--max", "1", "--n", "3"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,cf_re,cf_im"));
    assert_eq!(lines.next(), Some("0,1,0"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn json_matches_csv() {
    let base = ["pdf", "--alpha", "0.7", "--rho", "0.3", "--min", "-3", "--max", "3", "--n", "7"];
    let csv = stdout(&freestable(&base));
    let mut args = base.to_vec();
    args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&freestable(&args).stdout).unwrap();
    assert_eq!(json["metadata"]["alpha"], 0.7);
    assert_eq!(json["metadata"]["rho"], 0.3);
    assert_eq!(json["metadata"]["method"], "auto");
    assert!(json["metadata"]["version"].is_string());
    let rows = json["rows"].as_array().unwrap();
    for (line, row) in csv.lines().skip(1).zip(rows) {
        let parsed: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let from_json: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(parsed, from_json);
    }
    assert_eq!(rows.len(), 7);
}

#[test]
fn log_grid_and_bpb() {
    let o = freestable(&["pdf", "--alpha", "0.5", "--rho", "1", "--min", "0.26", "--max", "1000", "--n", "3", "--log"]);
    let xs: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(xs[0], 0.26);
    assert_eq!(xs[2], 1000.0);
    assert!((xs[1] - (0.26f64 * 1000.0).sqrt()).abs() < 1e-12);
    // rho_tilde = 1/2 at alpha = 1.5 is rho = (1 - 0.25) / 1.5 = 0.5
    let a = freestable(&["pdf", "--alpha", "1.5", "--rho", "0.5", "--bpb", "--n", "3"]);
    let b = freestable(&["pdf", "--alpha", "1.5", "--rho", "0.5", "--n", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sample_reproducible() {
    let args = ["sample", "--law", "free", "--alpha", "0.5", "--rho", "1", "--n", "3", "--seed", "1"];
    let a = freestable(&args);
    let b = freestable(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let xs: Vec<f64> = stdout(&a).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), 3);
    assert!(xs.iter().all(|&x| x >= 0.25));
    let c = freestable(&["sample", "--law", "free", "--alpha", "0.5", "--rho", "1", "--n", "3", "--seed", "2"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_freestable"));
        cmd.args(["sample", "--alpha", "1.5", "--rho", "0.5", "--n", "4"]);
        cmd.env_remove("FREESTABLE_SEED");
        if let Some(e) = env {
            cmd.env("FREESTABLE_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_eq!(run(Some("5"), Some("6")), run(None, Some("6")));
    assert_ne!(run(Some("5"), None), run(None, Some("6")));
}

#[test]
fn classical_variance() {
    let o = freestable(&["sample", "--law", "classical", "--alpha", "2", "--rho", "0.5", "--n", "1e5", "--seed", "9"]);
    let xs: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), 100_000);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // standard error of the variance is 2 sqrt(2/n), about 0.009
    assert!((var - 2.0).abs() < 0.05, "variance {var}");
}

#[test]
fn exit_codes() {
    let o = freestable(&["pdf", "--alpha", "1", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("alpha=1 not admissible"), "{err}");
    assert_eq!(err.lines().count(), 1);

    assert_eq!(freestable(&["pdf", "--alpha", "1.5", "--rho", "0.9"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--bogus"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--tol", "1e-16"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--n", "0"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--n", "2e7"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--min", "3", "--max", "1"]).status.code(), Some(2));
    assert_eq!(freestable(&["pdf", "--alpha", "2", "--rho", "0.5", "--min", "0", "--log"]).status.code(), Some(2));
    assert_eq!(freestable(&["check", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(freestable(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_subset_report() {
    let o = freestable(&["check", "--suite", "duality", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["suite"], "duality");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["pass"], true);
    let cases = r["cases"].as_array().unwrap();
    assert!(!cases.is_empty());
    let ids: Vec<&str> = cases.iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for c in cases {
        assert!(c["id"].as_str().unwrap().starts_with("duality/"));
        for key in ["paper_ref", "alpha", "rho", "metric", "tolerance", "pass"] {
            assert!(!c[key].is_null(), "missing {key}");
        }
    }
}

#[test]
fn check_seed_affects_only_monte_carlo() {
    let run = |seed: &str| -> serde_json::Value {
        let o = freestable(&["check", "--suite", "cauchy", "--seed", seed, "--mc-samples", "2000"]);
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_slice(&o.stdout).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    let (ca, cb) = (a["cases"].as_array().unwrap(), b["cases"].as_array().unwrap());
    assert_eq!(ca.len(), cb.len());
    let mut mc_differs = false;
    for (x, y) in ca.iter().zip(cb) {
        if x["id"].as_str().unwrap().starts_with("cauchy-mc/") {
            mc_differs |= x["metric"] != y["metric"];
        } else {
            assert_eq!(x["metric"], y["metric"]);
        }
    }
    assert!(mc_differs);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("freestable-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pdf.csv");
    let o = freestable(&[
        "pdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "5", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("pdf_semicircle.csv"));
    std::fs::remove_dir_all(&dir).unwrap();
}
