//! `hmev` — fit and compare extreme-value models on intermittent event
//! records, from synthetic benchmarks or daily station archives.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit code for malformed or unusable input data.
pub const EXIT_DATA: u8 = 3;
/// Exit code for sampler aborts and convergence failures.
pub const EXIT_CONVERGENCE: u8 = 4;

/// Marker error for convergence failures (exit code 4).
#[derive(Debug)]
pub struct ConvergenceFailure(pub String);

impl std::fmt::Display for ConvergenceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConvergenceFailure {}

#[derive(Parser)]
#[command(
    name = "hmev",
    version,
    about = "Bayesian extreme-value modelling of intermittent event records",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the resolved run configuration.
    Config(ConfigArgs),
    /// Generate synthetic benchmark scenario replicates.
    Simulate(commands::simulate::SimulateArgs),
    /// Parse, quality-control and decluster a daily station record.
    Ingest(commands::ingest::IngestArgs),
    /// Fit one model to a block dataset with adaptive HMC.
    Fit(commands::fit::FitArgs),
    /// Return-level curves and predictive checks from fitted draws.
    Predict(commands::predict::PredictArgs),
    /// Score fitted draws against train/test maxima into a metrics ledger.
    Validate(commands::validate::ValidateArgs),
    /// Run the full generate→fit→predict→validate study matrix.
    Benchmark(commands::benchmark::BenchmarkArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Print every resolved setting as TOML.
    #[arg(long)]
    dump: bool,
    /// Base configuration file to resolve over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Config(args) => run_config(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Validate(args) => commands::validate::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConvergenceFailure>().is_some() {
                ExitCode::from(EXIT_CONVERGENCE)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}

fn run_config(args: ConfigArgs) -> anyhow::Result<()> {
    let config = config::RunConfig::load(args.config.as_deref())?;
    if args.dump {
        print!("{}", config.dump());
    } else {
        println!("use --dump to print the resolved configuration");
    }
    Ok(())
}
