use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod support;

#[derive(Parser)]
#[command(
    name = "oadse",
    version,
    about = "Cost prediction and design-space search for optical DNN accelerators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict energy, latency, throughput and area of one design.
    Predict(PredictArgs),
    /// Search a design space for the design minimizing an objective.
    Search(SearchArgs),
    /// Cost uniformly sampled designs and report threshold exceedance.
    Sweep(SweepArgs),
    /// Tabulate several designs side by side.
    Compare(CompareArgs),
}

#[derive(Args)]
struct NetworkTech {
    /// Network file, or the name of a built-in network (lenet5, alexnet, ...).
    #[arg(long)]
    network: String,
    /// Technology parameter file; the built-in defaults when omitted.
    #[arg(long)]
    tech: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: NetworkTech,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include the per-layer breakdown (the CSV output becomes one row per layer).
    #[arg(long)]
    per_layer: bool,
    /// Also report the objective of this design under a search config and space.
    #[arg(long, requires = "space")]
    search_config: Option<PathBuf>,
    #[arg(long, requires = "search_config")]
    space: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Baseline {
    Random,
    Exhaustive,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: NetworkTech,
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    search_config: PathBuf,
    /// Overrides the search config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a baseline instead of the gradient search.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Samples for the random baseline (defaults to the search's evaluation budget).
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: NetworkTech,
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Compute-density and throughput-per-energy thresholds as `CD,TPE`
    /// (OPS/mm², OPS/(s·J)). Repeatable.
    #[arg(long = "thresholds", value_parser = support::parse_threshold)]
    thresholds: Vec<(f64, f64)>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: NetworkTech,
    /// Design files, one row each. Repeatable.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Predict(a) => commands::predict::run(a),
        Command::Search(a) => commands::search::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::Compare(a) => commands::compare::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(support::exit_code(&e))
        }
    }
}
