use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use curvflow::evolve::{self, BoundaryMode, FlowConfig, FlowSample, FlowStatus, PdeConfig, PdeStatus, Shape};
use curvflow::matfun::{calculus_suite, CalculusConfig};
use curvflow::pinch::{verify, VerifyConfig};
use curvflow::symfun::{check_class, parse_speed, SpeedFunction};
use curvflow::Error;

#[derive(Parser)]
#[command(name = "curvflow", version, about = "Experiments for fully nonlinear curvature flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the structural conditions on a speed function.
    CheckClass(CheckClassArgs),
    /// Monte-Carlo search for negative values of the pinching form.
    VerifyPinch(VerifyPinchArgs),
    /// Evolve an axisymmetric convex body until it nearly vanishes.
    Flow(FlowArgs),
    /// Run the graph equation u_t = F(D^2 u) from perturbed quadratic data.
    Pde(PdeArgs),
    /// Compare spectral derivatives with finite differences.
    Calculus(CalculusArgs),
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckClassArgs {
    /// Shorthand (`power-mean:0.5`), JSON descriptor, or `@file`.
    #[arg(long)]
    speed: Option<String>,
    /// Arity for shorthand descriptors (default 3).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyPinchArgs {
    #[arg(long)]
    speed: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    gap_min: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowArgs {
    #[arg(long)]
    speed: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// `sphere:R`, `ellipsoid:a,b` or `perturbed:R,amplitude,mode`.
    #[arg(long, default_value = "sphere:1")]
    shape: String,
    #[arg(long, default_value_t = 128)]
    grid: usize,
    #[arg(long, default_value_t = 0.2)]
    cfl: f64,
    /// Stop once the inradius falls below this fraction of its initial value.
    #[arg(long, default_value_t = 5e-4)]
    stop_inradius: f64,
    #[arg(long, default_value_t = 2_000_000)]
    max_steps: usize,
    /// Required final rescaled-sphere error for exit 0.
    #[arg(long, default_value_t = 0.01)]
    rescaled_threshold: f64,
    /// Allowed per-sample decrease of the pinching ratio.
    #[arg(long, default_value_t = 1e-6)]
    pinch_tol: f64,
    /// Sample trace CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Full JSON trace (config echo and samples).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep a profile snapshot every this many steps (0 disables).
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
    /// Directory for `profile_<step>.csv` files.
    #[arg(long, default_value = "snapshots")]
    snapshot_dir: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PdeArgs {
    #[arg(long, default_value = "power-mean:0")]
    speed: Option<String>,
    /// Nodes per side of the square grid.
    #[arg(long, default_value_t = 65)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    bump: f64,
    #[arg(long, default_value_t = 0.5)]
    dt_factor: f64,
    #[arg(long, default_value_t = 0.1)]
    t_end: f64,
    /// `exact` or `frozen`.
    #[arg(long, default_value = "exact")]
    boundary: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalculusArgs {
    #[arg(long)]
    speed: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum eigen-gap; below 1e-3 one pair is placed exactly this far apart.
    #[arg(long, default_value_t = 1e-3)]
    gap: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::InvalidConfig(_) | Error::ArityMismatch { .. } | Error::ShapeMismatch(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

const OK: u8 = 0;
const FAILED: u8 = 2;
const STEP_LIMIT: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::CheckClass(a) => with_config(a, |a| a.config.clone()).and_then(cmd_check_class),
        Command::VerifyPinch(a) => with_config(a, |a| a.config.clone()).and_then(cmd_verify_pinch),
        Command::Flow(a) => with_config(a, |a| a.config.clone()).and_then(cmd_flow),
        Command::Pde(a) => with_config(a, |a| a.config.clone()).and_then(cmd_pde),
        Command::Calculus(a) => with_config(a, |a| a.config.clone()).and_then(cmd_calculus),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(FAILED)
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CURVFLOW_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("CURVFLOW_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

/// Overlays the keys of the `--config` JSON object onto the parsed flags.
fn with_config<T: Serialize + DeserializeOwned>(args: T, path: impl Fn(&T) -> Option<PathBuf>) -> Result<T, Failure> {
    let Some(path) = path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let overrides: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(overrides) = overrides else {
        return Err(Failure::Usage(format!("{}: expected a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(&args).expect("flag records serialize");
    let fields = merged.as_object_mut().expect("flag records are objects");
    for (key, value) in overrides {
        let value = match (key.as_str(), value) {
            ("speed", v @ serde_json::Value::Object(_)) => serde_json::Value::String(v.to_string()),
            (_, v) => v,
        };
        fields.insert(key.replace('-', "_"), value);
    }
    serde_json::from_value(merged).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn speed(text: Option<&str>, n: Option<usize>, default_n: usize) -> Result<SpeedFunction, Failure> {
    let text = text.ok_or_else(|| Failure::Usage("--speed is required".into()))?;
    let text = match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?,
        None => text.to_string(),
    };
    let f = parse_speed(&text, n.unwrap_or(default_n))?;
    if let Some(n) = n {
        if f.arity() != n {
            return Err(Error::ArityMismatch { expected: n, got: f.arity() }.into());
        }
    }
    Ok(f)
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_csv_file(path: &Path, write: impl FnOnce(BufWriter<File>) -> curvflow::Result<()>) -> Result<(), Failure> {
    write(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn cmd_check_class(a: CheckClassArgs) -> Outcome {
    let f = speed(a.speed.as_deref(), a.n, 3)?;
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    positive("tol", a.tol)?;
    let report = check_class(&f, a.samples, a.tol, a.seed);
    emit(&report, a.output.as_deref())?;
    Ok(ExitCode::from(if report.all_pass() { OK } else { FAILED }))
}

fn cmd_verify_pinch(a: VerifyPinchArgs) -> Outcome {
    let f = speed(a.speed.as_deref(), a.n, 3)?;
    positive("tol", a.tol)?;
    positive("gap-min", a.gap_min)?;
    let cfg = VerifyConfig { n: f.arity(), trials: a.trials, seed: a.seed, tol: a.tol, gap_min: a.gap_min };
    let report = verify(&f, &cfg)?;
    emit(&report, a.output.as_deref())?;
    Ok(ExitCode::from(if report.passed() { OK } else { FAILED }))
}

#[derive(Serialize)]
struct FlowSummary {
    status: FlowStatus,
    steps: usize,
    extinction_estimate: f64,
    f_at_ones: f64,
    max_pinch_decrease: f64,
    pinch_monotone: bool,
    rescaled_threshold: f64,
    initial: FlowSample,
    last: FlowSample,
    message: Option<String>,
}

fn cmd_flow(a: FlowArgs) -> Outcome {
    let f = speed(a.speed.as_deref(), a.n, 2)?;
    let shape = Shape::parse(&a.shape)?;
    positive("rescaled-threshold", a.rescaled_threshold)?;
    positive("pinch-tol", a.pinch_tol)?;
    let cfg = FlowConfig {
        shape,
        n: f.arity(),
        grid: a.grid,
        cfl: a.cfl,
        stop_inradius: a.stop_inradius,
        max_steps: a.max_steps,
        snapshot_every: a.snapshot_every,
        ..FlowConfig::default()
    };
    let trace = evolve::run_flow(&f, &cfg)?;
    if let Some(p) = &a.csv {
        write_csv_file(p, |w| trace.write_csv(w))?;
    }
    if !trace.snapshots.is_empty() {
        fs::create_dir_all(&a.snapshot_dir)?;
        for s in &trace.snapshots {
            write_csv_file(&a.snapshot_dir.join(format!("profile_{}.csv", s.step)), |w| s.write_csv(w))?;
        }
    }
    if let Some(p) = &a.output {
        emit(&trace, Some(p))?;
    }
    let decrease = trace.max_pinch_decrease();
    let summary = FlowSummary {
        status: trace.status,
        steps: trace.steps,
        extinction_estimate: trace.extinction_estimate,
        f_at_ones: trace.f_at_ones,
        max_pinch_decrease: decrease,
        pinch_monotone: decrease <= a.pinch_tol,
        rescaled_threshold: a.rescaled_threshold,
        initial: trace.samples[0].clone(),
        last: trace.last().clone(),
        message: trace.message.clone(),
    };
    emit(&summary, None)?;
    let code = match trace.status {
        FlowStatus::StepLimit => STEP_LIMIT,
        FlowStatus::ConvexityLost => FAILED,
        FlowStatus::Converged if summary.pinch_monotone && summary.last.rescaled_err < a.rescaled_threshold => OK,
        FlowStatus::Converged => FAILED,
    };
    Ok(ExitCode::from(code))
}

#[derive(Serialize)]
struct PdeSummary {
    status: PdeStatus,
    epsilon0: f64,
    min_hessian_eigenvalue: f64,
    max_quadratic_deviation: f64,
    dt: f64,
    steps: usize,
}

fn cmd_pde(a: PdeArgs) -> Outcome {
    let f = speed(a.speed.as_deref(), Some(2), 2)?;
    let boundary_mode = match a.boundary.as_str() {
        "exact" => BoundaryMode::Exact,
        "frozen" => BoundaryMode::Frozen,
        other => return Err(Failure::Usage(format!("--boundary must be exact or frozen, got '{other}'"))),
    };
    let cfg = PdeConfig {
        m: a.grid,
        boundary_mode,
        bump: a.bump,
        tol_drift: a.tol,
        dt_factor: a.dt_factor,
        t_end: a.t_end,
        ..PdeConfig::default()
    };
    let trace = evolve::run_pde(&f, &cfg)?;
    if let Some(p) = &a.csv {
        write_csv_file(p, |w| trace.write_csv(w))?;
    }
    if let Some(p) = &a.output {
        emit(&trace, Some(p))?;
    }
    let summary = PdeSummary {
        status: trace.status,
        epsilon0: trace.epsilon0,
        min_hessian_eigenvalue: trace.min_hessian_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min),
        max_quadratic_deviation: trace.max_quadratic_deviation.iter().copied().fold(0.0, f64::max),
        dt: trace.dt,
        steps: trace.steps,
    };
    emit(&summary, None)?;
    Ok(ExitCode::from(if trace.status == PdeStatus::Preserved { OK } else { FAILED }))
}

fn cmd_calculus(a: CalculusArgs) -> Outcome {
    let f = speed(a.speed.as_deref(), a.n, 3)?;
    let cfg = CalculusConfig { trials: a.trials, seed: a.seed, gap: a.gap, ..CalculusConfig::default() };
    let report = calculus_suite(&f, &cfg)?;
    emit(&report, a.output.as_deref())?;
    Ok(ExitCode::from(if report.passed { OK } else { FAILED }))
}
