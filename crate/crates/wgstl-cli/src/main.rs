//! `wgstl` — learn, evaluate, and monitor weighted graph-based signal
//! temporal logic (w-GSTL) classifiers over networked time series.
//!
//! Exit codes: `0` success, `1` runtime failure (I/O while writing,
//! non-finite training loss, exhausted synthesis), `2` usage or input
//! validation error (bad flags, malformed files, unknown nodes,
//! incompatible shapes).

mod commands;
mod formula;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wgstl::Error;

#[derive(Parser)]
#[command(
    name = "wgstl",
    version,
    about = "Learn and monitor weighted graph-based signal temporal logic classifiers",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once; TrainArgs dominates by design
enum Command {
    /// Learn a w-GSTL formula from a labeled dataset
    Train(TrainArgs),
    /// Report a trained model's accuracy on a labeled dataset
    Eval(EvalArgs),
    /// Classify every sample of a dataset with a trained model
    Predict(PredictArgs),
    /// Per-sample robustness and satisfaction of a formula over a dataset
    Monitor(MonitorArgs),
    /// Generate a labeled synthetic dataset separated by a known formula
    Synth(SynthArgs),
    /// Pretty-print a model file: formula, parameters, training summary
    Inspect(InspectArgs),
    /// Build a spatial graph from coordinates by radius thresholding
    MakeGraph(MakeGraphArgs),
}

/// Training hyperparameters as flags; each one overrides the config file.
#[derive(Args, Debug, Default)]
struct ConfigOverrides {
    /// Scale of the exponential loss
    #[arg(long)]
    eta: Option<f64>,
    /// Smoothness of soft min/max aggregation
    #[arg(long)]
    sigma: Option<f64>,
    /// Adam learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Mini-batch size
    #[arg(long)]
    batch_size: Option<usize>,
    /// Number of training epochs per step
    #[arg(long)]
    epochs: Option<usize>,
    /// Seed for shuffling and initialization
    #[arg(long)]
    seed: Option<u64>,
    /// Adam first-moment decay
    #[arg(long)]
    adam_beta1: Option<f64>,
    /// Adam second-moment decay
    #[arg(long)]
    adam_beta2: Option<f64>,
    /// Adam denominator offset
    #[arg(long)]
    adam_eps: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled dataset (JSON), or a tabular manifest with --manifest
    #[arg(long)]
    data: PathBuf,
    /// Treat --data as a tabular manifest of per-node CSV files
    #[arg(long)]
    manifest: bool,
    /// File holding the formula structure text
    #[arg(long)]
    structure: PathBuf,
    /// Graph node at which the formula is evaluated
    #[arg(long)]
    root: String,
    /// Held-out labeled dataset for the final accuracy report
    #[arg(long, conflicts_with = "train_fraction")]
    test_data: Option<PathBuf>,
    /// Split --data: train on this fraction, test on the rest
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Seed for the train/test split shuffle
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Replace missing values (NaN) by zero before anything else
    #[arg(long)]
    impute: bool,
    /// Slice every sample into windows of this many time steps
    #[arg(long)]
    window_len: Option<usize>,
    /// Steps between consecutive window starts
    #[arg(long, default_value_t = 1, requires = "window_len")]
    window_stride: usize,
    /// Window labeling rule as JSON, e.g.
    /// '{"rule":"next-step-dim","node":"v1","dim":0,"threshold":1.0}'
    #[arg(long, requires = "window_len")]
    label_rule: Option<String>,
    /// Where to write the trained model
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    /// Text report; defaults to the model path with extension `report.txt`
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-epoch CSV log; defaults to the model path with extension `log.csv`
    #[arg(long)]
    log_csv: Option<PathBuf>,
    /// Training configuration file (JSON); flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Labeled dataset to score
    #[arg(long)]
    data: PathBuf,
    /// Worker threads for per-sample evaluation
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Optional JSON sidecar with the scores
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Dataset to classify (labels are reported but not required to match)
    #[arg(long)]
    data: PathBuf,
    /// Worker threads for per-sample evaluation
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Optional CSV sidecar with one row per sample
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MonitorArgs {
    /// Trained model file holding the formula to monitor
    #[arg(long, conflicts_with = "formula")]
    model: Option<PathBuf>,
    /// Standalone formula file (structure, operators, predicates, root)
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Dataset to monitor
    #[arg(long)]
    data: PathBuf,
    /// Crisp (min/max) semantics
    #[arg(long, conflicts_with = "soft")]
    crisp: bool,
    /// Smooth weighted semantics (the default; requires --model)
    #[arg(long)]
    soft: bool,
    /// Evaluate at this node instead of the formula's root
    #[arg(long)]
    node: Option<String>,
    /// Worker threads for per-sample evaluation
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Optional CSV sidecar with one row per sample
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Trained model file providing formula, graph, and root
    #[arg(long, conflicts_with_all = ["formula", "graph"])]
    model: Option<PathBuf>,
    /// Standalone formula file (use together with --graph)
    #[arg(long, requires = "graph")]
    formula: Option<PathBuf>,
    /// Graph file for --formula
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Number of positive samples
    #[arg(long)]
    pos: usize,
    /// Number of negative samples
    #[arg(long)]
    neg: usize,
    /// Robustness margin every sample must clear
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    /// Standard deviation of additive Gaussian noise
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Trajectory horizon; defaults to the formula's required horizon
    #[arg(long)]
    horizon: Option<usize>,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate at this node instead of the stored root
    #[arg(long)]
    node: Option<String>,
    /// Where to write the dataset
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct MakeGraphArgs {
    /// JSON map of node id to [latitude, longitude] in degrees
    #[arg(long)]
    coords: PathBuf,
    /// Connect nodes closer than this great-circle distance
    #[arg(long)]
    radius_km: f64,
    /// Where to write the graph
    #[arg(long)]
    out: PathBuf,
}

/// Exit code for a failed run: 1 for runtime failures, 2 for anything the
/// user can fix in their invocation or input files.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::NonFiniteLoss { .. } | Error::SynthExhausted { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Monitor(args) => commands::monitor::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Inspect(args) => commands::inspect::run(args),
        Command::MakeGraph(args) => commands::make_graph::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
