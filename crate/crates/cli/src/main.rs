//! `reslab`: bound pipelines, exact verification sweeps, and special-function
//! lookups from the command line.
//!
//! Exit codes: 0 success, 1 inequality violation, 2 regime or pipeline
//! failure, 3 budget exceeded, 64 usage or domain error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use reslab::bounds::{self, BoundConfig, BoundReport, Regime, SweepConfig};
use reslab::characters::RatioMode;
use reslab::parallel::THREADS_ENV;
use reslab::report;
use reslab::resonators::ResonatorSpec;
use reslab::smooth::{self, Method};
use reslab::{primes, specfun, Error};

const EXIT_VIOLATION: u8 = 1;
const EXIT_REGIME: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "reslab", version, about = "Resonance-method lower bounds for character sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: $RESLAB_THREADS, else all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower bound for Δ(N, q) or Δ(q/N, q) from the regime pipelines
    Bound(BoundArgs),
    /// Exact weighted mean against exact Δ at desk scale
    Verify(VerifyArgs),
    /// Adjacent-regime bounds at the regime boundaries
    Boundaries(BoundariesArgs),
    /// Ψ(x, y): exact count and saddle estimate
    Smooth(SmoothArgs),
    /// Dickman ρ(u)
    Dickman(DickmanArgs),
    /// κ(σ), c_σ and G(σ)
    Kappa(KappaArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
struct Tolerances {
    /// B in log^B q < N (second theorem)
    #[arg(long = "B", default_value_t = 20.0)]
    b: f64,
    /// C in ε = C / log log q
    #[arg(long, default_value_t = 10.0)]
    eps_c: f64,
    /// ε_θ in θ ≤ 1 − ε_θ (fourth theorem)
    #[arg(long, default_value_t = 0.01)]
    eps_theta: f64,
    /// Accept the closest point when the implicit system has no solution
    #[arg(long)]
    relaxed: bool,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Modulus as an integer (primality is tested)
    #[arg(long, conflicts_with = "logq")]
    q: Option<u64>,
    /// log q as a decimal string
    #[arg(long)]
    logq: Option<f64>,
    /// N as an integer
    #[arg(long = "N", conflicts_with_all = ["logn", "theta"])]
    n: Option<u64>,
    /// log N
    #[arg(long = "logN", conflicts_with = "theta")]
    logn: Option<f64>,
    /// θ = log N / log q
    #[arg(long)]
    theta: Option<f64>,
    /// Bound Δ(q/N, q) instead of Δ(N, q)
    #[arg(long)]
    dual: bool,
    /// Treat q as composite (with --logq)
    #[arg(long)]
    composite: bool,
    /// Force a regime instead of selecting one
    #[arg(long)]
    regime: Option<String>,
    /// Rows `logq,logN[,dual]`, one report per row
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "sweep")]
    q: Option<u64>,
    /// Sum length (default ⌊√q⌋)
    #[arg(long = "N")]
    n: Option<u64>,
    /// Resonator as `family=...;key=value;...` (default: empty)
    #[arg(long)]
    spec: Option<String>,
    /// first_moment, second_moment, dual_first or dual_second
    #[arg(long, default_value = "first_moment")]
    mode: String,
    /// Resonator length x (default depends on mode)
    #[arg(long)]
    x: Option<u64>,
    /// Run a named sweep (`default`: 200 configurations)
    #[arg(long, conflicts_with = "q")]
    sweep: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct BoundariesArgs {
    #[arg(long)]
    logq: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args, Debug)]
struct SmoothArgs {
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct DickmanArgs {
    #[arg(long)]
    u: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct KappaArgs {
    #[arg(long)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget(_) => EXIT_BUDGET,
            Error::Domain(_) | Error::Parse(_) => EXIT_USAGE,
            _ => EXIT_REGIME,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_USAGE, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

type Out = Box<dyn Write>;

fn open_output(path: &Option<PathBuf>) -> Result<Out, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut Out, v: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer(out: &mut Out) -> csv::Writer<&mut Out> {
    csv::Writer::from_writer(out)
}

fn csv_err(e: csv::Error) -> Failure {
    usage(e.to_string())
}

fn config(tol: &Tolerances, is_prime: bool, threads: usize) -> BoundConfig {
    BoundConfig {
        b_exponent: tol.b,
        eps_constant: tol.eps_c,
        eps_theta: tol.eps_theta,
        is_prime,
        relaxed_implicit: tol.relaxed,
        threads,
    }
}

fn bound_one(log_q: f64, log_n: f64, dual: bool, regime: Option<Regime>, cfg: &BoundConfig) -> reslab::Result<BoundReport> {
    match regime {
        Some(Regime::TinyN) => bounds::bound_tiny_n(log_q, log_n, dual),
        Some(r) => bounds::run_regime(r, log_q, log_n, cfg),
        None => bounds::bound(log_q, log_n, dual, cfg),
    }
}

fn parse_rows(path: &PathBuf) -> Result<Vec<(f64, f64, bool)>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        // optional header line
        if i == 0 && rec.get(0).map_or(false, |s| s.parse::<f64>().is_err()) {
            continue;
        }
        let num = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .ok_or_else(|| usage(format!("row {:?}: missing column {i}", rec)))?
                .parse::<f64>()
                .map_err(|e| usage(format!("row {:?}: {e}", rec)))
        };
        let dual = matches!(rec.get(2), Some("1" | "true" | "dual"));
        rows.push((num(0)?, num(1)?, dual));
    }
    Ok(rows)
}

fn cmd_bound(a: &BoundArgs, threads: usize, out: &mut Out) -> Result<u8, Failure> {
    let regime = a.regime.as_deref().map(str::parse::<Regime>).transpose()?;
    let mut rows = Vec::new();
    let is_prime;
    if let Some(path) = &a.input {
        is_prime = !a.composite;
        rows = parse_rows(path)?;
    } else {
        let (log_q, prime) = match (a.q, a.logq) {
            (Some(q), None) if q >= 3 => ((q as f64).ln(), primes::is_prime(q)),
            (None, Some(l)) => (l, !a.composite),
            _ => return Err(usage("give exactly one of --q (≥ 3) or --logq")),
        };
        is_prime = prime;
        let log_n = match (a.n, a.logn, a.theta) {
            (Some(n), None, None) if n >= 1 => (n as f64).ln(),
            (None, Some(l), None) => l,
            (None, None, Some(t)) => t * log_q,
            _ => return Err(usage("give exactly one of --N, --logN or --theta")),
        };
        rows.push((log_q, log_n, a.dual));
    }
    let cfg = config(&a.tol, is_prime, threads);
    let mut reports = Vec::with_capacity(rows.len());
    for &(lq, ln, dual) in &rows {
        reports.push(bound_one(lq, ln, dual, regime, &cfg)?);
    }
    match a.format {
        Format::Json if a.input.is_none() => write_json(out, &reports[0])?,
        Format::Json => write_json(out, &reports)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(report::BOUND_CSV_HEADER).map_err(csv_err)?;
            for r in &reports {
                w.write_record(report::bound_csv_record(r)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Text if reports.len() == 1 => write!(out, "{}", report::text_report(&reports[0]))?,
        Format::Text => write!(out, "{}", report::text_table(&reports))?,
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, threads: usize, out: &mut Out) -> Result<u8, Failure> {
    let configs: Vec<SweepConfig> = match (&a.sweep, a.q) {
        (Some(name), _) if name == "default" => bounds::default_sweep()?,
        (Some(name), _) => return Err(usage(format!("unknown sweep `{name}` (known: default)"))),
        (None, Some(q)) => {
            if q < 3 {
                return Err(usage("--q must be at least 3"));
            }
            let n = a.n.unwrap_or_else(|| ((q as f64).sqrt().floor() as u64).max(1));
            let spec = match &a.spec {
                Some(s) => s.parse::<ResonatorSpec>()?,
                None => ResonatorSpec::empty(),
            };
            vec![SweepConfig { q, n, spec, mode: a.mode.parse::<RatioMode>()? }]
        }
        (None, None) => return Err(usage("give --q or --sweep")),
    };
    let reports: Vec<BoundReport> = if configs.len() == 1 {
        let c = &configs[0];
        vec![bounds::verify_against_exact(c.q, c.n, &c.spec, c.mode, a.x, threads)?]
    } else {
        bounds::run_sweep(&configs, threads).into_iter().collect::<reslab::Result<_>>()?
    };
    let violations = reports.iter().filter(|r| !r.inequality.map_or(false, |i| i.holds)).count();
    match a.format {
        Format::Json if reports.len() == 1 => write_json(out, &reports[0])?,
        Format::Json => write_json(out, &reports)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(report::VERIFY_CSV_HEADER).map_err(csv_err)?;
            for (c, r) in configs.iter().zip(&reports) {
                w.write_record(report::verify_csv_record(r, c.spec.family.name(), c.spec.squarefree_only)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Text => {
            let mut rows = vec![report::VERIFY_CSV_HEADER[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            for (c, r) in configs.iter().zip(&reports) {
                rows.push(report::verify_csv_record(r, c.spec.family.name(), c.spec.squarefree_only)[1..].to_vec());
            }
            write!(out, "{}", report::align(&rows))?;
        }
    }
    out.flush()?;
    if violations > 0 {
        eprintln!("reslab: {violations} inequality violation(s)");
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}

fn cmd_boundaries(a: &BoundariesArgs, threads: usize, out: &mut Out) -> Result<u8, Failure> {
    let cfg = config(&a.tol, false, threads);
    let rows = bounds::boundary_table(a.logq, &cfg)?;
    match a.format {
        Format::Json => write_json(out, &rows)?,
        Format::Text => write!(out, "{}", report::boundary_text(&rows))?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["schema", "boundary", "log_q", "log_n", "left", "left_bound", "right", "right_bound", "exponent", "ratio", "pass"])
                .map_err(csv_err)?;
            for r in &rows {
                w.write_record([
                    report::CSV_SCHEMA.to_string(),
                    r.boundary.clone(),
                    r.log_q.to_string(),
                    r.log_n.to_string(),
                    r.left.to_string(),
                    r.left_bound.to_string(),
                    r.right.to_string(),
                    r.right_bound.to_string(),
                    r.exponent.to_string(),
                    r.ratio.to_string(),
                    r.pass.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_VIOLATION })
}

fn tag(value: f64, method: Method) -> serde_json::Value {
    json!({ "value": value, "method": method })
}

/// Flat key/value output shared by the lookup commands.
fn write_values(out: &mut Out, format: Format, fields: &[(&str, Option<(f64, Method)>)], extra: &[(&str, &str)]) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut m = serde_json::Map::new();
            for (k, v) in fields {
                m.insert(k.to_string(), v.map_or(serde_json::Value::Null, |(x, meth)| tag(x, meth)));
            }
            for (k, v) in extra {
                m.insert(k.to_string(), json!(v));
            }
            write_json(out, &m)?;
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            let mut head = vec!["schema".to_string()];
            let mut row = vec![report::CSV_SCHEMA.to_string()];
            for (k, v) in fields {
                head.push(k.to_string());
                head.push(format!("{k}_method"));
                row.push(v.map_or_else(String::new, |(x, _)| x.to_string()));
                row.push(v.map_or_else(String::new, |(_, m)| m.to_string()));
            }
            for (k, v) in extra {
                head.push(k.to_string());
                row.push(v.to_string());
            }
            w.write_record(&head).map_err(csv_err)?;
            w.write_record(&row).map_err(csv_err)?;
            w.flush()?;
        }
        Format::Text => {
            let mut rows = Vec::new();
            for (k, v) in fields {
                rows.push(vec![
                    k.to_string(),
                    v.map_or_else(|| "-".into(), |(x, m)| format!("{} [{m}]", report::fmt_num(x))),
                ]);
            }
            for (k, v) in extra {
                rows.push(vec![k.to_string(), v.to_string()]);
            }
            write!(out, "{}", report::align(&rows))?;
        }
    }
    Ok(())
}

fn cmd_smooth(a: &SmoothArgs, out: &mut Out) -> Result<u8, Failure> {
    let est = smooth::psi_saddle_estimate(a.x, a.y)?;
    let exact = est.psi_exact.map(|v| (v as f64, Method::Exact));
    write_values(
        out,
        a.format,
        &[
            ("x", Some((a.x, Method::Exact))),
            ("y", Some((a.y, Method::Exact))),
            ("psi_exact", exact),
            ("alpha", Some((est.alpha, Method::Saddle))),
            ("log_psi_saddle", Some((est.psi_saddle_log, est.method))),
            ("psi_saddle", (est.psi_saddle_log < 700.0).then(|| (est.psi_saddle_log.exp(), est.method))),
            ("ratio", est.ratio.map(|r| (r, Method::Saddle))),
        ],
        &[],
    )?;
    Ok(0)
}

fn cmd_dickman(a: &DickmanArgs, out: &mut Out) -> Result<u8, Failure> {
    let lr = smooth::log_dickman_rho(a.u)?;
    // the delay-equation table is a numerical solution, reported as exact
    let source = if a.u <= 1.0 { "closed_form" } else { "dde_table" };
    let m = Method::Exact;
    write_values(
        out,
        a.format,
        &[("u", Some((a.u, Method::Exact))), ("rho", Some((lr.exp(), m))), ("log_rho", Some((lr, m)))],
        &[("source", source)],
    )?;
    Ok(0)
}

fn cmd_kappa(a: &KappaArgs, out: &mut Out) -> Result<u8, Failure> {
    let p = specfun::sigma_params(a.sigma)?;
    write_values(
        out,
        a.format,
        &[
            ("sigma", Some((p.sigma, Method::Exact))),
            ("kappa", Some((p.kappa, Method::Exact))),
            ("c_sigma", Some((p.c_sigma, Method::Exact))),
            ("G_sigma", Some((p.g_sigma, Method::Exact))),
            ("kappa_limit_at_1", Some((specfun::kappa_limit_at_one(), Method::Exact))),
        ],
        &[],
    )?;
    Ok(0)
}

fn default_threads() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let threads = cli.threads.unwrap_or_else(default_threads);
    let mut out = open_output(&cli.output)?;
    let code = match &cli.command {
        Command::Bound(a) => cmd_bound(a, threads, &mut out)?,
        Command::Verify(a) => cmd_verify(a, threads, &mut out)?,
        Command::Boundaries(a) => cmd_boundaries(a, threads, &mut out)?,
        Command::Smooth(a) => cmd_smooth(a, &mut out)?,
        Command::Dickman(a) => cmd_dickman(a, &mut out)?,
        Command::Kappa(a) => cmd_kappa(a, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("reslab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
