mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_pressure::models::{hard_core, potts, potts_zero_coupling, widom_rowlinson_with, ModelInstance};
use lattice_pressure::pressure::{convergence_probe, estimate_pressure, EstimateMode, DEFAULT_SAFETY};
use lattice_pressure::verify::{run_suite, Suite, DEFAULT_TOLERANCE, ORACLE_TOLERANCE};
use serde_json::{json, Value};

use config::Config;
use output::{render, OutFormat, RunRecord};

#[derive(Parser)]
#[command(name = "lattice-pressure", version, about = "Pressure of nearest-neighbour lattice models on Z^2")]
struct Cli {
    /// File of `key=value` lines giving defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, global = true)]
    out: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the pressure to accuracy 1/N.
    Pressure {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "accuracy-N")]
        accuracy_n: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Prefactor of the decay bound (certified mode).
        #[arg(long = "C")]
        c: Option<f64>,
        /// Decay rate of the bound (certified mode).
        #[arg(long)]
        alpha: Option<f64>,
        /// Safety factor of empirical mode.
        #[arg(long)]
        safety: Option<f64>,
    },
    /// Conditional origin probabilities for n = 1..n-max and their decay.
    Probe {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "n-max")]
        n_max: Option<usize>,
    },
    /// Run the exact identity suites.
    Verify {
        /// all, duality, es, wr, amalgamation, bounds, dominance or oracle.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Thresholds, regime and Q(pi) of a model.
    Regime {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Potts,
    Wr,
    Hardcore,
}

impl FromStr for ModelName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Empirical,
    Certified,
}

impl FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// An error reported on stderr with exit code 1.
struct Failure(String);

impl From<lattice_pressure::Error> for Failure {
    fn from(e: lattice_pressure::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure(e)
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure(format!("missing required flag --{flag}")))
}

fn build_model(args: ModelArgs, cfg: &Config, p_c_site: f64) -> Result<ModelInstance, Failure> {
    let name = require(cfg.pick(args.model, "model")?, "model")?;
    let q = cfg.pick(args.q, "q")?;
    Ok(match name {
        ModelName::Potts => {
            let q = require(q, "q")?;
            let beta = require(cfg.pick(args.beta, "beta")?, "beta")?;
            if beta == 0.0 {
                potts_zero_coupling(q)?
            } else {
                potts(q, beta)?
            }
        }
        ModelName::Wr => {
            let q = require(q, "q")?;
            let lambda = require(cfg.pick(args.lambda, "lambda")?, "lambda")?;
            widom_rowlinson_with(q, lambda, p_c_site)?
        }
        ModelName::Hardcore => hard_core(require(cfg.pick(args.gamma, "gamma")?, "gamma")?)?,
    })
}

fn tolerances() -> Value {
    json!({ "identity": DEFAULT_TOLERANCE, "oracle": ORACLE_TOLERANCE })
}

/// Runs the command and returns the record plus the exit code.
fn run(cli: Cli) -> Result<(RunRecord, OutFormat, u8), Failure> {
    let start = Instant::now();
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let out = cfg.pick(cli.out, "out")?.unwrap_or(OutFormat::Json);
    let p_c_site = cfg.p_c_site()?;
    let mut code = 0u8;
    let (command, model, results, tolerances) = match cli.command {
        Command::Pressure { model, accuracy_n, mode, c, alpha, safety } => {
            let m = build_model(model, &cfg, p_c_site)?;
            let n = require(cfg.pick(accuracy_n, "accuracy-N")?, "accuracy-N")?;
            let mode = match cfg.pick(mode, "mode")?.unwrap_or(ModeArg::Empirical) {
                ModeArg::Certified => {
                    let (Some(c), Some(alpha)) = (cfg.pick(c, "C")?, cfg.pick(alpha, "alpha")?) else {
                        return Err(Failure("certified mode needs both --C and --alpha".into()));
                    };
                    EstimateMode::Certified { c, alpha }
                }
                ModeArg::Empirical => EstimateMode::Empirical {
                    safety: cfg.pick(safety, "safety")?.unwrap_or(DEFAULT_SAFETY),
                },
            };
            let est = estimate_pressure(&m, n, mode)?;
            if est.best_effort {
                code = 2;
            }
            ("pressure", Some(m.kind), serde_json::to_value(est).expect("serializable"), tolerances())
        }
        Command::Probe { model, n_max } => {
            let m = build_model(model, &cfg, p_c_site)?;
            let n_max = require(cfg.pick(n_max, "n-max")?, "n-max")?;
            let report = convergence_probe(&m, n_max)?;
            ("probe", Some(m.kind), serde_json::to_value(report).expect("serializable"), tolerances())
        }
        Command::Verify { suite, tol } => {
            let name = cfg.pick(suite, "suite")?.unwrap_or_else(|| "all".into());
            let suites = if name == "all" { Suite::ALL.to_vec() } else { vec![Suite::parse(&name)?] };
            let tol = cfg.pick(tol, "tol")?;
            let mut records = Vec::new();
            let mut used = serde_json::Map::new();
            for s in &suites {
                used.insert(s.as_str().into(), json!(tol.unwrap_or(s.default_tolerance())));
                records.extend(run_suite(*s, tol)?);
            }
            let passed = records.iter().all(|r| r.passed);
            if !passed {
                code = 1;
            }
            let names: Vec<&str> = suites.iter().map(|s| s.as_str()).collect();
            let results = json!({ "suites": names, "passed": passed, "checks": records });
            ("verify", None, results, Value::Object(used))
        }
        Command::Regime { model } => {
            let m = build_model(model, &cfg, p_c_site)?;
            let q = m.q_report(p_c_site);
            let results = json!({
                "thresholds": m.thresholds,
                "regime": m.regime.as_str(),
                "q_pi": q.q_pi,
                "below_p_c": q.below_p_c,
                "p_c_site": p_c_site,
                "flags": m.flags,
            });
            ("regime", Some(m.kind), results, tolerances())
        }
    };
    let record = RunRecord {
        schema_version: output::SCHEMA_VERSION,
        command: command.into(),
        model,
        results,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        constants: json!({ "p_c_site": p_c_site, "tolerances": tolerances }),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok((record, out, code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((record, format, code)) => {
            let _ = writeln!(std::io::stdout(), "{}", render(&record, format));
            ExitCode::from(code)
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
