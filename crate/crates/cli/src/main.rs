//! `racket`: pulse synthesis, simulation, sweeps and gate design.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or parameters.
    Usage(String),
    /// A numerical step failed outright.
    Numeric(String),
    Io(String),
}

impl From<racket_core::Error> for CliError {
    fn from(e: racket_core::Error) -> Self {
        use racket_core::Error as E;
        match e {
            E::Domain(_) | E::Usage(_) | E::Format(_) => CliError::Usage(e.to_string()),
            E::Divergence(_) | E::Numeric(_) => CliError::Numeric(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "racket", version, about = "Rigid-body pulse design for two-level systems")]
struct Cli {
    /// TOML config, or a JSON sidecar from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Serialize)]
struct Globals {
    /// Sweep threads; 0 uses all cores.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    /// Seconds per body time unit, applied to exported time columns.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    time_scale: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a sampled control field.
    #[command(allow_negative_numbers = true)]
    Pulse(PulseArgs),
    /// Propagate a state through a pulse.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Figure of merit over a grid of field errors.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Design a gate: not, phase, hadamard, or random.
    #[command(allow_negative_numbers = true)]
    Gate(GateArgs),
    /// Phase budget of one closed orbit.
    Montgomery(OrbitArgs),
    /// Fit the transfer time against ln(1/eps).
    FitPeriod(FitArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pulse(_) => "pulse",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Gate(_) => "gate",
            Command::Montgomery(_) => "montgomery",
            Command::FitPeriod(_) => "fit-period",
        }
    }

    fn flags(&self) -> Value {
        let v = match self {
            Command::Pulse(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Sweep(a) => serde_json::to_value(a),
            Command::Gate(a) => serde_json::to_value(a),
            Command::Montgomery(a) => serde_json::to_value(a),
            Command::FitPeriod(a) => serde_json::to_value(a),
        };
        v.expect("flags serialize")
    }
}

#[derive(Args, Debug, Serialize)]
struct PulseArgs {
    /// tre, allen-eberly, rect, zero, not, composite-not.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    /// rotating or oscillating.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    /// Time offset of the Allen-Eberly pulse.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// plus or minus.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    /// Length of the zero pulse.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    /// body, or experiment to move the pole onto e2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<String>,
    /// Read the pulse from a CSV file instead.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pulse: PulseArgs,
    /// Initial Bloch vector x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m0: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    /// Extra outputs: axis-angle, propagator.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    emit: Option<Vec<String>>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pulse: PulseArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m0: Option<Vec<f64>>,
    /// j3, j2, or fidelity (against a NOT).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    merit: Option<String>,
    /// experiment or fig3.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_range: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_steps: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_range: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_steps: Option<usize>,
    /// peak (multiples of the peak transverse field) or absolute.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_unit: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct GateArgs {
    /// not, phase, hadamard, or random.
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<String>,
    /// Tuning knob of the NOT gate: eps or k.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    knob: Option<String>,
    /// Bracket for the knob, lo,hi.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<Vec<f64>>,
    /// Palindromic three-pulse NOT.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    composite: bool,
    /// Relative phase of the phase gate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct OrbitArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_samples: Option<Vec<f64>>,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut base = match &cli.config {
        Some(path) => config::load_file(path)?,
        None => Map::new(),
    };
    if let Some(c) = &cli.command {
        base.insert("command".into(), c.name().into());
    }
    let mut flags = serde_json::to_value(&cli.globals).expect("globals serialize");
    if let (Value::Object(f), Some(Value::Object(extra))) = (&mut flags, cli.command.as_ref().map(Command::flags)) {
        f.extend(extra);
    }
    let cfg = config::merge(base, flags)?;
    if cfg.command.is_none() {
        return Err(CliError::Usage("no subcommand given and the config names none".into()));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = effective_config(&cli).and_then(|cfg| commands::run(&cfg, &cli.out));
    match result {
        Ok(outcome) if outcome.converged => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("not converged: {}", outcome.message);
            ExitCode::from(3)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}
