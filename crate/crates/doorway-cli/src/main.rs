//! `doorway` — entrance detection from GPS quality and Wi-Fi RSS traces.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or flag values), 2
//! data/model error (unreadable or invalid files, training failures, no
//! entrance detected). Results go to stdout or `--out`; diagnostics go to
//! stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "doorway",
    version,
    about = "Detect building-entrance positions from GPS and Wi-Fi signal traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic labeled approach walks as CSV
    Gen(GenArgs),
    /// Train a classifier on a readings CSV and save the model
    Train(TrainArgs),
    /// Cross-validate one classifier and print its metrics
    Eval(EvalArgs),
    /// Cross-validate all four classifiers under identical folds
    Bench(BenchArgs),
    /// Estimate the entrance position along one trace
    Detect(DetectArgs),
    /// Print the entrance rules of a trained decision tree
    Rules(RulesArgs),
    /// Export per-distance signal aggregates for plotting
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Knn,
    Nb,
    Tree,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectFormat {
    Text,
    Json,
}

#[derive(Args)]
struct GenArgs {
    /// Number of approach walks
    #[arg(long, default_value_t = 100)]
    traces: usize,
    /// Master seed; trace i uses a derived per-trace seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Grid step, meters
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Walk start (signed distance, meters)
    #[arg(long, default_value_t = 10.0)]
    start: f64,
    /// Walk end (signed distance, meters)
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    end: f64,
    /// Entrance band half-width, meters
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Gaussian noise std for RSS, dB
    #[arg(long = "noise-rss", default_value_t = 3.0)]
    noise_rss: f64,
    /// Gaussian noise std for SNR, dB
    #[arg(long = "noise-snr", default_value_t = 3.0)]
    noise_snr: f64,
    /// Gaussian noise std for the satellite count
    #[arg(long = "noise-sats", default_value_t = 2.0)]
    noise_sats: f64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HyperParams {
    /// Neighbor count for knn (odd)
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Maximum tree depth
    #[arg(long = "max-depth", default_value_t = 4)]
    max_depth: usize,
    /// Minimum samples per tree leaf
    #[arg(long = "min-leaf", default_value_t = 1)]
    min_leaf: usize,
    /// SVM regularization strength
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// SVM training epochs
    #[arg(long, default_value_t = 200)]
    epochs: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Readings CSV to train on
    #[arg(long)]
    data: PathBuf,
    /// Where to write the model document
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    hyper: HyperParams,
    /// SVM shuffle seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long)]
    data: PathBuf,
    /// Number of stratified folds
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Fold-shuffle seed (also the SVM training seed)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[command(flatten)]
    hyper: HyperParams,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

#[derive(Args)]
struct DetectArgs {
    /// Trained model document
    #[arg(long)]
    model: PathBuf,
    /// Single-trace readings CSV (distances strictly decreasing)
    #[arg(long)]
    trace: PathBuf,
    /// Majority-smoothing window (odd)
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, value_enum, default_value_t = DetectFormat::Text)]
    format: DetectFormat,
}

#[derive(Args)]
struct RulesArgs {
    /// Trained tree model document
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures split by exit code.
enum CliError {
    /// Flag-level misuse: exit 1.
    Usage(String),
    /// File, data, or model problems discovered while running: exit 2.
    Data(String),
}

impl From<doorway_core::Error> for CliError {
    fn from(err: doorway_core::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
