//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check suite, 2 usage or domain error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::checks::{run_suite, CheckConfig, CheckReport, Suite};
use crate::dist::{mellin_free, sample_classical, FreeStable, Method, RngState};
use crate::error::Error;
use crate::params::{from_bpb, make_params, BpbParams, FreeStableParams};
use crate::specfun::Complex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const MAX_COUNT: f64 = 1e7;

#[derive(Debug, Parser)]
#[command(name = "freestable", version, about = "Free stable distributions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the density.
    Pdf(TableArgs),
    /// Tabulate the distribution function.
    Cdf(TableArgs),
    /// Tabulate the characteristic function.
    Cf(TableArgs),
    /// Tabulate the positive-half Mellin transform `E[X^s 1_{X>0}]`.
    Mellin {
        #[command(flatten)]
        table: TableArgs,
        /// A single real `s`; overrides the grid.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
    },
    /// Draw samples, one per line.
    Sample {
        #[command(flatten)]
        params: LawArgs,
        #[arg(long, value_enum, default_value_t = Law::Free)]
        law: Law,
        /// Number of samples; accepts forms like `1e5`.
        #[arg(long, default_value = "1", value_parser = parse_count)]
        n: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run an identity check suite and print its report.
    Check {
        /// One of all, methods, closed-form, duality, positivity, mellin, cauchy,
        /// ratio, classical, cf, mellin-cf, psi0.
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        /// Sample size of each Monte Carlo check.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        mc_samples: usize,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Law {
    Free,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Series,
    Inversion,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Series => Method::Series,
            MethodArg::Inversion => Method::Inversion,
        }
    }
}

#[derive(Debug, Args)]
struct LawArgs {
    /// Stability index in (0, 1) or (1, 2].
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Positivity parameter; read as the alternative `rho_tilde` with `--bpb`.
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Read `--rho` in the alternative parameterization.
    #[arg(long)]
    bpb: bool,
}

impl LawArgs {
    fn params(&self) -> crate::Result<FreeStableParams> {
        if self.bpb {
            from_bpb(BpbParams::new(self.alpha, self.rho)?)
        } else {
            make_params(self.alpha, self.rho)
        }
    }
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Seed; falls back to FREESTABLE_SEED, then 42.
    #[arg(long, env = "FREESTABLE_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    law: LawArgs,
    /// First grid point.
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    min: f64,
    /// Last grid point.
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    max: f64,
    /// Grid size; accepts forms like `1e3`.
    #[arg(long, default_value = "101", value_parser = parse_count)]
    n: usize,
    /// Geometric instead of linear spacing.
    #[arg(long)]
    log: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Tolerance of the inversion route and the cf Fourier fallback, in [1e-14, 1e-2].
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    io: IoArgs,
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.fract() != 0.0 || !(1.0..=MAX_COUNT).contains(&v) {
        return Err(format!("count must be an integer in [1, 1e7], got {s}"));
    }
    Ok(v as usize)
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of one command, mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn at(what: &str, point: f64, e: Error) -> Self {
        let code = if matches!(e, Error::Domain(_)) {
            EXIT_USAGE
        } else {
            EXIT_NUMERICAL
        };
        Self {
            code,
            message: format!("{what} failed at {point}: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Domain(_)) {
            EXIT_USAGE
        } else {
            EXIT_NUMERICAL
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Locale-independent shortest round-trip decimal text.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn grid(t: &TableArgs) -> Result<Vec<f64>, Failure> {
    if !(t.min.is_finite() && t.max.is_finite()) || t.min > t.max {
        return Err(Failure::usage(format!(
            "grid needs finite min <= max, got [{}, {}]",
            t.min, t.max
        )));
    }
    if t.log && t.min <= 0.0 {
        return Err(Failure::usage("log grid needs min > 0"));
    }
    let n = t.n;
    if n == 1 {
        return Ok(vec![t.min]);
    }
    let (a, b) = if t.log {
        (t.min.ln(), t.max.ln())
    } else {
        (t.min, t.max)
    };
    let mut xs: Vec<f64> = (0..n)
        .map(|k| {
            let v = a + (b - a) * k as f64 / (n - 1) as f64;
            if t.log {
                v.exp()
            } else {
                v
            }
        })
        .collect();
    // pin the ends against rounding
    xs[0] = t.min;
    xs[n - 1] = t.max;
    Ok(xs)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if (1e-14..=1e-2).contains(&tol) {
        Ok(())
    } else {
        Err(Failure::usage(format!("tolerance must lie in [1e-14, 1e-2], got {tol}")))
    }
}

fn metadata(p: &FreeStableParams, method: &str, tol: f64) -> Value {
    json!({
        "alpha": p.alpha(),
        "rho": p.rho(),
        "method": method,
        "tolerance": tol,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn render_table(columns: &[&str], rows: &[Vec<f64>], format: Format, meta: Value) -> String {
    match format {
        Format::Csv => {
            let mut out = columns.join(",");
            out.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(|&v| format_number(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let v = json!({ "metadata": meta, "columns": columns, "rows": rows });
            let mut s = serde_json::to_string(&v).unwrap_or_default();
            s.push('\n');
            s
        }
    }
}

/// Evaluate `f` over the grid in parallel, keeping grid order.
fn evaluate<T: Send>(
    xs: &[f64],
    what: &str,
    f: impl Fn(f64) -> crate::Result<T> + Sync,
) -> Result<Vec<T>, Failure> {
    xs.par_iter()
        .map(|&x| f(x).map_err(|e| Failure::at(what, x, e)))
        .collect()
}

fn cmd_table<'a>(
    kind: &str,
    t: &'a TableArgs,
    s: Option<f64>,
) -> Result<(String, &'a IoArgs), Failure> {
    check_tol(t.tol)?;
    let p = t.law.params()?;
    let xs = match s {
        Some(s) => vec![s],
        None => grid(t)?,
    };
    let d = FreeStable::new(p)?;
    let method = Method::from(t.method);
    let (columns, rows): (&[&str], Vec<Vec<f64>>) = match kind {
        "pdf" => {
            let v = evaluate(&xs, "pdf", |x| match method {
                Method::Inversion => crate::inversion::density_oracle(&p, x, t.tol),
                m => d.pdf_with(x, m),
            })?;
            (&["x", "pdf"], xs.iter().zip(v).map(|(&x, v)| vec![x, v]).collect())
        }
        "cdf" => {
            let v = evaluate(&xs, "cdf", |x| d.cdf(x))?;
            (&["x", "cdf"], xs.iter().zip(v).map(|(&x, v)| vec![x, v]).collect())
        }
        "cf" => {
            let v = evaluate(&xs, "cf", |z| d.cf_with(z, t.tol))?;
            (
                &["z", "cf_re", "cf_im"],
                xs.iter().zip(v).map(|(&z, c)| vec![z, c.re, c.im]).collect(),
            )
        }
        _ => {
            let v = evaluate(&xs, "mellin", |s| mellin_free(&p, Complex::new(s, 0.0)))?;
            (
                &["s", "mellin_re", "mellin_im"],
                xs.iter().zip(v).map(|(&s, c)| vec![s, c.re, c.im]).collect(),
            )
        }
    };
    let method_name = match kind {
        "pdf" => method.as_str(),
        "mellin" => "closed-form",
        _ => "auto",
    };
    let format = t.io.format.unwrap_or(Format::Csv);
    let meta = metadata(&p, method_name, t.tol);
    Ok((render_table(columns, &rows, format, meta), &t.io))
}

fn cmd_sample(law: &LawArgs, kind: Law, n: usize, io: &IoArgs) -> Result<String, Failure> {
    let p = law.params()?;
    let mut rng = RngState::new(io.seed);
    let xs = match kind {
        Law::Free => FreeStable::new(p)?.sample(&mut rng, n)?,
        Law::Classical => sample_classical(&p, &mut rng, n)?,
    };
    Ok(match io.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::with_capacity(24 * n);
            for x in xs {
                let _ = writeln!(out, "{}", format_number(x));
            }
            out
        }
        Format::Json => {
            let law_name = match kind {
                Law::Free => "free",
                Law::Classical => "classical",
            };
            let mut meta = metadata(&p, "table-inverse", 0.0);
            meta["law"] = json!(law_name);
            meta["seed"] = json!(io.seed);
            let mut s = serde_json::to_string_pretty(&json!({ "metadata": meta, "samples": xs }))
                .unwrap_or_default();
            s.push('\n');
            s
        }
    })
}

fn render_report(r: &CheckReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("id,paper_ref,alpha,rho,metric,tolerance,pass\n");
            for c in &r.cases {
                let _ = writeln!(
                    out,
                    "{},\"{}\",{},{},{},{},{}",
                    c.id,
                    c.anchor.replace('"', "\"\""),
                    format_number(c.alpha),
                    format_number(c.rho),
                    format_number(c.metric),
                    format_number(c.tolerance),
                    c.pass
                );
            }
            out
        }
    }
}

fn emit(text: &str, io: &IoArgs) -> Result<(), Failure> {
    let res = match &io.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush())
        }
    };
    res.map_err(|e| Failure::usage(format!("cannot write output: {e}")))
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Pdf(t) => emit_table("pdf", t, None),
        Command::Cdf(t) => emit_table("cdf", t, None),
        Command::Cf(t) => emit_table("cf", t, None),
        Command::Mellin { table, s } => emit_table("mellin", table, *s),
        Command::Sample {
            params,
            law,
            n,
            io,
        } => {
            let text = cmd_sample(params, *law, *n, io)?;
            emit(&text, io)?;
            Ok(EXIT_OK)
        }
        Command::Check {
            suite,
            mc_samples,
            io,
        } => {
            let cfg = CheckConfig {
                mc_samples: *mc_samples,
                ..CheckConfig::new(*suite, io.seed)
            };
            let report = run_suite(&cfg);
            emit(&render_report(&report, io.format.unwrap_or(Format::Json)), io)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(if report.pass {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn emit_table(kind: &str, t: &TableArgs, s: Option<f64>) -> Result<i32, Failure> {
    let (text, io) = cmd_table(kind, t, s)?;
    emit(&text, io)?;
    Ok(EXIT_OK)
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
