//! `tulik`: simulate, train, predict and evaluate discrete-time point-process models.
//!
//! Exit codes: 0 success, 2 usage or file access, 3 bad data, 4 numeric failure.
//! Errors are printed to stderr as one JSON object per line.

mod aggregate;
mod error;
mod eval;
mod files;
mod predict;
mod simulate;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tulik_core::inference::Method;
use tulik_core::simulate::Preset;

use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tulik", version, about = "Discrete-time point processes with event-time uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a dataset from a preset or a parameter file.
    Simulate(SimulateArgs),
    /// Fit a model to a dataset.
    Train(TrainArgs),
    /// Write per-step or interval event probabilities as CSV.
    Predict(PredictArgs),
    /// Compare fitted parameters with the truth and score predictions.
    Eval(EvalArgs),
    /// Mean and standard deviation of every metric across eval outputs.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Benchmark preset.
    #[arg(long, value_parser = parse_preset, conflicts_with = "params", required_unless_present = "params")]
    pub preset: Option<Preset>,
    /// Parameter file to simulate from instead of a preset.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Number of trajectories.
    #[arg(long)]
    pub num: usize,
    /// Seed of the trajectory streams.
    #[arg(long)]
    pub seed: u64,
    /// Seed of the preset's random truth (network preset only).
    #[arg(long, default_value_t = 0)]
    pub truth_seed: u64,
    /// Redraws allowed per trajectory that meets a nonpositive intensity.
    #[arg(long, default_value_t = 100)]
    pub max_redraws: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Overrides the `method` key of the configuration.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// `key = value` configuration; defaults to the small time-only preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output parameter file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output line-delimited JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Vi,
    Gd,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Vi => Method::Vi,
            MethodArg::Gd => Method::Gd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Step,
    Interval,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Step)]
    pub mode: Mode,
    /// Interval mode: history is cut after this step.
    #[arg(long, required_if_eq("mode", "interval"))]
    pub from: Option<i64>,
    /// Interval mode: last step of the window.
    #[arg(long, required_if_eq("mode", "interval"))]
    pub to: Option<i64>,
    /// Interval mode: report a single node instead of every node.
    #[arg(long)]
    pub node: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Truth parameter file; defaults to the truth embedded in the dataset.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Node whose per-step events are classified.
    #[arg(long)]
    pub target_node: Option<usize>,
    /// Dataset for choosing the classification threshold; defaults to `--data`.
    #[arg(long, requires = "target_node")]
    pub validation: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Eval outputs of replicated runs.
    #[arg(required = true, num_args = 2..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

/// Caps rayon's pool at `TULIK_THREADS` when set.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("TULIK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::usage(format!("TULIK_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Train(a) => train::run(&a),
        Command::Predict(a) => predict::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Aggregate(a) => aggregate::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::usage(first).to_json_line());
            return ExitCode::from(error::USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code)
        }
    }
}
