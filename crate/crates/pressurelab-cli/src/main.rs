mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pressurelab::parallel::{default_workers, with_workers};
use pressurelab::Error;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "pressurelab", version, about = "Pressure, dimension and the pressure semi-norm from periodic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Pressure,
    Dimension,
    Norm,
    Scan,
    Cycles,
    Order,
    Involution,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pressure of a potential on its subshift or map.
    Pressure(Knobs),
    /// Hausdorff dimension of a Julia set by Bowen's equation.
    Dimension(Knobs),
    /// Pressure semi-norm of one path, or the pressure form of two.
    Norm(Knobs),
    /// Degeneracy scan and theorem check at a quasi-Blaschke point.
    Scan(Knobs),
    /// Periodic cycles and multipliers as a table.
    Cycles(Knobs),
    /// Cyclic order of the fixed points transported along a path.
    Order(Knobs),
    /// Involution image of a point and the multiplier conjugation check.
    Involution(Knobs),
}

#[derive(Args, Debug, Clone)]
pub struct Knobs {
    /// JSON spec file ("-" for stdin).
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest cycle period (truncation n).
    #[arg(long)]
    period_max: Option<usize>,
    /// Transfer-matrix depth k (pressure).
    #[arg(long)]
    depth: Option<usize>,
    /// Tolerance: degeneracy threshold (scan), conjugation tolerance (involution),
    /// convergence warning level (pressure).
    #[arg(long)]
    tol: Option<f64>,
    /// Finite-difference step along paths.
    #[arg(long)]
    h: Option<f64>,
    /// Half-width of the dimension profile along the path (norm).
    #[arg(long)]
    t_max: Option<f64>,
    /// Grid points: dimension profile (norm) or continuation steps (order).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to PRESSURELAB_WORKERS or available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved run configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: String,
    pub output: Option<String>,
    pub format: Format,
    pub period_max: usize,
    pub depth: Option<usize>,
    pub tol: f64,
    pub h: f64,
    pub t_max: Option<f64>,
    pub grid: usize,
    pub seed: u64,
    pub workers: usize,
}

pub mod exit {
    pub const BAD_INPUT: u8 = 1;
    pub const FAILURE: u8 = 2;
    pub const INCONCLUSIVE: u8 = 3;
    pub const RESOURCE_CAP: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn bad_input(msg: impl Into<String>) -> Self {
        Self {
            code: exit::BAD_INPUT,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_)
            | Error::Domain(_)
            | Error::DenominatorZero(_)
            | Error::NotBlaschke
            | Error::AmbiguousPairing => exit::BAD_INPUT,
            Error::ResourceCap { .. } => exit::RESOURCE_CAP,
            _ => exit::FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Rendered output plus the exit status it implies.
pub struct Outcome {
    pub body: String,
    pub code: u8,
}

fn in_range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<T, CliError> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(CliError::bad_input(format!("--{name} = {v} is outside [{lo}, {hi}]")))
    }
}

fn resolve(kind: CommandKind, k: &Knobs) -> Result<RunConfig, CliError> {
    let (period, tol, h, grid, format) = match kind {
        CommandKind::Pressure => (12, pressurelab::thermo::CONVERGENCE_TOL, 0.0, 0, Format::Json),
        CommandKind::Dimension => (12, 1e-12, 0.0, 0, Format::Json),
        CommandKind::Norm => (12, 1e-2, pressurelab::metric::DEFAULT_SWEEP_H, 9, Format::Json),
        CommandKind::Scan => (8, pressurelab::metric::TOL_DEG, pressurelab::metric::DEFAULT_SWEEP_H, 0, Format::Json),
        CommandKind::Cycles => (6, 0.0, 0.0, 0, Format::Csv),
        CommandKind::Order => (1, 0.0, 0.0, 64, Format::Json),
        CommandKind::Involution => (6, 1e-8, 0.0, 0, Format::Json),
    };
    let period_max = in_range("period-max", k.period_max.unwrap_or(period), 1, 24)?;
    let depth = k.depth.map(|d| in_range("depth", d, 1, 24)).transpose()?;
    let tol = in_range("tol", k.tol.unwrap_or(tol), 0.0, 1.0)?;
    let h = in_range("h", k.h.unwrap_or(h), 0.0, 0.1)?;
    let t_max = k.t_max.map(|t| in_range("t-max", t, 0.0, 1.0)).transpose()?;
    let grid = in_range("grid", k.grid.unwrap_or(grid), 0, 10_000)?;
    let workers = in_range("workers", k.workers.unwrap_or_else(default_workers), 1, 1024)?;
    Ok(RunConfig {
        command: kind,
        input: k.input.display().to_string(),
        output: k.output.as_ref().map(|p| p.display().to_string()),
        format: k.format.unwrap_or(format),
        period_max,
        depth,
        tol,
        h,
        t_max,
        grid,
        seed: k.seed,
        workers,
    })
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| CliError::bad_input(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::bad_input(format!("reading {}: {e}", path.display())))
    }
}

fn run(kind: CommandKind, knobs: &Knobs) -> Result<Outcome, CliError> {
    let cfg = resolve(kind, knobs)?;
    let text = read_input(&knobs.input)?;
    let outcome = with_workers(cfg.workers, || commands::dispatch(&cfg, &text))?;
    match &knobs.output {
        Some(p) => std::fs::write(p, &outcome.body)
            .map_err(|e| CliError::bad_input(format!("writing {}: {e}", p.display())))?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, knobs) = match &cli.command {
        Command::Pressure(k) => (CommandKind::Pressure, k),
        Command::Dimension(k) => (CommandKind::Dimension, k),
        Command::Norm(k) => (CommandKind::Norm, k),
        Command::Scan(k) => (CommandKind::Scan, k),
        Command::Cycles(k) => (CommandKind::Cycles, k),
        Command::Order(k) => (CommandKind::Order, k),
        Command::Involution(k) => (CommandKind::Involution, k),
    };
    match run(kind, knobs) {
        Ok(o) => ExitCode::from(o.code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
