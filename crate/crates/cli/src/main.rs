//! `tdls` - time-domain scattering runs from a plain-text config.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver non-convergence.

mod config;
mod output;
mod runner;

use clap::Parser;
use config::{ExperimentConfig, Mode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "tdls",
    about = "Time-domain acoustic scattering via convolution quadrature and trigonometric collocation"
)]
struct Cli {
    /// Experiment mode.
    #[arg(value_enum)]
    mode: Mode,
    /// Path to the TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Number of concurrent frequency solves (0 = available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), runner::RunError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| {
        runner::RunError::Config(format!("cannot read {}: {e}", cli.config.display()))
    })?;
    let cfg = ExperimentConfig::parse(&text).map_err(runner::RunError::Config)?;
    cfg.validate(cli.mode).map_err(runner::RunError::Config)?;
    let out_dir = cli
        .out
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let workers = cli.workers.unwrap_or(cfg.workers);
    runner::execute(cli.mode, &cfg, &out_dir, workers)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ runner::RunError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e @ runner::RunError::Solver(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
