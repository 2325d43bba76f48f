//! `mimicry`: sums, distances, verification suites, arc classification and
//! extremal sweeps from the command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage error, 3 a
//! resource cap was hit.

mod source;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mimicry::arith::{set_sieve_cap, PrimeCache, DEFAULT_SIEVE_CAP};
use mimicry::dioph::classify_arc;
use mimicry::expsums::{max_char_sum, weighted_expsum_profile, SumProfile};
use mimicry::extremal::{
    default_xi, growth_report, read_records, run_sweep, write_records_csv, SweepConfig, SweepControl, CSV_FILE,
};
use mimicry::mimicry::nearest_primitive_window;
use mimicry::theory::delta_g;
use mimicry::verify::{run_suite, Suite, VerifyConfig};
use mimicry::Error;

use source::{parse_character, BuildError, FunctionSpec};

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "mimicry", version, about = "Character sums and multiplicative mimicry")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
struct RunConfig {
    /// seed for every randomized choice
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    /// override the default tolerance of a verification suite
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// largest prime bound the sieve may reach
    #[arg(long, global = true, default_value_t = DEFAULT_SIEVE_CAP)]
    sieve_cap: u64,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// directory for the persisted prime table
    #[arg(long, global = true, env = "MIMICRY_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Σ_{n≤x, n y-smooth} f(n)/n e(nα), or the partial sums of a character
    Sum {
        #[command(flatten)]
        f: FunctionSpec,
        #[arg(long)]
        x: Option<f64>,
        /// smoothness bound (default: none)
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// trajectory points to keep
        #[arg(long, default_value_t = 1000)]
        points: u64,
        /// max_{t≤q} |Σ_{n≤t} χ(n)| instead (needs --char)
        #[arg(long)]
        max_char_sum: bool,
    },
    /// Run a verification suite
    Verify {
        /// gs-identity | summin | gauss | coset | triangle | vanishing
        suite: String,
        /// random cases for the randomized suites
        #[arg(long)]
        cases: Option<usize>,
        /// modulus bound for the character suites
        #[arg(long)]
        q_max: Option<u64>,
    },
    /// Classify α as minor, major or exceptional-major
    Arcs {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        y: f64,
        /// exceptional modulus
        #[arg(long)]
        m: u64,
        /// approximation window (default: min(theoretical, 1e12))
        #[arg(long)]
        window: Option<f64>,
    },
    /// The primitive character of small conductor that f most resembles
    Nearest {
        #[command(flatten)]
        f: FunctionSpec,
        #[arg(long)]
        y: f64,
        /// conductors below this bound are searched
        #[arg(long)]
        bound: f64,
        /// twist window T (default (ln y)²)
        #[arg(long)]
        t_window: Option<f64>,
    },
    /// Search prime moduli q ≡ 1 mod g for order-g characters matching the
    /// extremal pattern
    Extremal {
        #[arg(long)]
        g: u64,
        /// the odd auxiliary character (default: smallest conductor with order coprime to g)
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        qmax: f64,
        #[arg(long, default_value_t = 2)]
        qmin: u64,
        /// primes up to this bound form the pattern
        #[arg(long, default_value_t = 13)]
        pattern_bound: u64,
        /// keep characters matching at least up to this prime (default: the pattern bound)
        #[arg(long)]
        p_star: Option<u64>,
        /// run name; an existing run with this name is resumed
        #[arg(long, value_name = "NAME")]
        resume: Option<String>,
        /// parent directory of run directories
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        checkpoint_secs: f64,
        /// stop after this many batches (the run stays resumable)
        #[arg(long, hide = true)]
        max_batches: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Usage(m) => Failure::Usage(m),
            BuildError::Lib(e) => Failure::Lib(e),
        }
    }
}

struct Output {
    json: Value,
    csv: Option<Vec<u8>>,
}

fn csv_of<F: FnOnce(&mut Vec<u8>) -> mimicry::Result<()>>(f: F) -> Result<Option<Vec<u8>>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(Some(buf))
}

fn profile_output(p: SumProfile) -> Result<Output, Failure> {
    let csv = csv_of(|b| p.write_csv(b))?;
    Ok(Output { json: serde_json::to_value(&p).map_err(Error::from)?, csv })
}

fn ensure_primes(cfg: &RunConfig, bound: f64) -> Result<(), Failure> {
    if let Some(dir) = &cfg.cache_dir {
        if bound.is_finite() && bound >= 2.0 {
            let b = bound.floor() as u64;
            if b > cfg.sieve_cap {
                return Err(Error::CapExceeded { what: "sieve bound", value: b, cap: cfg.sieve_cap }.into());
            }
            PrimeCache::load_or_build(dir, b)?;
        }
    }
    Ok(())
}

fn run(cfg: &RunConfig, cmd: Command) -> Result<Output, Failure> {
    match cmd {
        Command::Sum { f, x, y, alpha, points, max_char_sum: chi_mode } => {
            if chi_mode {
                let c = f.source.character.as_ref().ok_or_else(|| Failure::Usage("--max-char-sum needs --char".into()))?;
                return profile_output(max_char_sum(&parse_character(c).map_err(Failure::Usage)?)?);
            }
            let x = x.ok_or_else(|| Failure::Usage("--x is required".into()))?;
            let y = y.unwrap_or(f64::INFINITY);
            ensure_primes(cfg, x.min(y))?;
            let func = f.build(cfg.seed)?;
            profile_output(weighted_expsum_profile(&func, x, y, alpha, points)?)
        }
        Command::Verify { suite, cases, q_max } => {
            let suite: Suite = suite.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let vc = VerifyConfig { seed: cfg.seed, cases, tolerance: cfg.tolerance, q_max };
            if vc.tolerance.is_some_and(|t| !(t > 0.0)) {
                return Err(Failure::Usage("--tolerance must be positive".into()));
            }
            let rep = run_suite(suite, &vc)?;
            let csv = {
                let mut b = b"label,error,tolerance,passed\n".to_vec();
                for c in &rep.cases {
                    writeln!(b, "\"{}\",{},{},{}", c.label, c.error, c.tolerance, c.passed)?;
                }
                Some(b)
            };
            let json = serde_json::to_value(&rep).map_err(Error::from)?;
            if !rep.passed {
                emit(cfg, &Output { json, csv })?;
                return Err(Failure::Check(format!("{} of {} cases failed", rep.failures, rep.total)));
            }
            Ok(Output { json, csv })
        }
        Command::Arcs { alpha, y, m, window } => {
            let a = classify_arc(alpha, y, m, window)?;
            let json = json!({
                "alpha": alpha,
                "b": a.approx.b,
                "r": a.approx.r,
                "quality": a.approx.quality,
                "M": a.approx.m_window,
                "arc_tag": a.tag,
                "margin": a.margin,
                "threshold": a.threshold,
                "exceptional_modulus": a.exceptional_modulus,
                "theoretical_M": if a.theoretical_m.is_finite() { json!(a.theoretical_m) } else { json!("inf") },
            });
            let csv = format!(
                "alpha,b,r,quality,M,arc_tag,margin\n{alpha},{},{},{},{},{:?},{}\n",
                a.approx.b, a.approx.r, a.approx.quality, a.approx.m_window, a.tag, a.margin
            );
            Ok(Output { json, csv: Some(csv.into_bytes()) })
        }
        Command::Nearest { f, y, bound, t_window } => {
            ensure_primes(cfg, y)?;
            let func = f.build(cfg.seed)?;
            let t = t_window.unwrap_or(y.ln().powi(2));
            let r = nearest_primitive_window(&func, y, bound, t)?;
            let row = |e: &mimicry::mimicry::NearestEntry| {
                format!("{},{},{},{}", e.conductor, e.index, e.report.distance_sq, e.report.minimizing_t)
            };
            let mut csv = format!("rank,conductor,index,distance_sq,minimizing_t\n1,{}\n", row(&r.best));
            if let Some(ru) = &r.runner_up {
                csv += &format!("2,{}\n", row(ru));
            }
            Ok(Output { json: serde_json::to_value(&r).map_err(Error::from)?, csv: Some(csv.into_bytes()) })
        }
        Command::Extremal { g, xi, qmax, qmin, pattern_bound, p_star, resume, runs_dir, checkpoint_secs, max_batches } => {
            if !(qmax >= 2.0) || !qmax.is_finite() {
                return Err(Failure::Usage("--qmax must be at least 2".into()));
            }
            let q_max = qmax.floor() as u64;
            if q_max > cfg.sieve_cap {
                return Err(Error::CapExceeded { what: "q range", value: q_max, cap: cfg.sieve_cap }.into());
            }
            let xi = match xi {
                Some(s) => parse_character(&s).map_err(Failure::Usage)?,
                None => default_xi(g)?,
            };
            ensure_primes(cfg, qmax)?;
            let config = SweepConfig { g, xi: xi.to_record(), pattern_bound, p_star: p_star.unwrap_or(pattern_bound), q_min: qmin, q_max };
            let name = resume.clone().unwrap_or_else(|| format!("g{g}-q{q_max}"));
            let dir = runs_dir.join(&name);
            if resume.is_none() && dir.exists() {
                std::fs::remove_dir_all(&dir)?;
            }
            let control = SweepControl { checkpoint_every: Duration::from_secs_f64(checkpoint_secs.max(0.0)), max_batches };
            let state = run_sweep(&dir, &config, control)?;
            let records = read_records(&dir)?;
            let report = if records.is_empty() { None } else { Some(growth_report(&records)?) };
            if let Some(r) = &report {
                r.write_csv(BufWriter::new(File::create(dir.join("growth.csv"))?))?;
            }
            let json = json!({
                "run_dir": dir.display().to_string(),
                "state": state,
                "growth": report.as_ref().map(|r| json!({
                    "rows": r.rows.len(),
                    "min_ratio": r.min_ratio,
                    "max_ratio": r.max_ratio,
                    "slope": r.slope,
                    "slope_undefined": r.slope_undefined,
                    "fitted_exponent": r.fitted_exponent,
                    "fitted_constant": r.fitted_constant,
                    "reference_exponent": 1.0 - delta_g(g).unwrap_or(f64::NAN),
                })),
            });
            let csv = if state.complete {
                Some(std::fs::read(dir.join(CSV_FILE))?)
            } else {
                csv_of(|b| write_records_csv(&records, b))?
            };
            Ok(Output { json, csv })
        }
    }
}

fn emit(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let bytes = match cfg.format {
        Format::Csv => out.csv.clone().ok_or_else(|| Failure::Usage("no CSV form for this command".into()))?,
        Format::Json => {
            let doc = json!({ "schema_version": SCHEMA_VERSION, "config": cfg, "result": out.json });
            let mut s = serde_json::to_vec_pretty(&doc).map_err(Error::from)?;
            s.push(b'\n');
            s
        }
    };
    match &cfg.out {
        Some(p) => std::fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = cli.config;
    if cfg.sieve_cap > DEFAULT_SIEVE_CAP * 10 {
        eprintln!("error: --sieve-cap may not exceed {}", DEFAULT_SIEVE_CAP * 10);
        return ExitCode::from(2);
    }
    set_sieve_cap(cfg.sieve_cap);
    if let Some(n) = cfg.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: could not configure {n} threads");
            return ExitCode::from(2);
        }
    }
    let result = run(&cfg, cli.command).and_then(|out| emit(&cfg, &out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_cap() { 3 } else { 2 })
        }
    }
}
