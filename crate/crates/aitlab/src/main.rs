//! Batch experiment CLI: validate, compare, simulate, temporal-value, sweep.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 invalid configuration,
//! 3 inadmissible model. Console output mirrors the emitted CSV lines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aitlab::config::ExperimentConfig;
use aitlab::runner::{run_compare, run_simulate, run_sweep, run_temporal_value, CompareReport};
use aitlab::validation::run_validate;
use aitlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "aitlab",
    version,
    about = "Monte Carlo laboratory for delayed-information log-utility portfolios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Cap on parallel worker threads.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Overrides the seed from the configuration.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Directory for emitted CSV/SVG files.
    #[arg(long, global = true, value_name = "PATH")]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the library invariant battery and print a pass/fail table.
    Validate,
    /// Estimate both strategies and their difference against closed forms.
    Compare,
    /// Run the configured strategy once and report its estimate.
    Simulate,
    /// Locate the delay at which the extra information stops paying.
    TemporalValue,
    /// Sweep a rate parameter and emit the sweep CSV and SVG.
    Sweep,
}

const DEFAULT_VALIDATE_SEED: u64 = 42;

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required for this subcommand".into()))?;
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        config.mc.seed = seed;
        config.build()?;
    }
    Ok(config)
}

fn print_compare(report: &CompareReport) {
    for line in &report.lines {
        println!("{line}");
    }
    let clamps: u64 = report.rows.iter().map(|r| r.estimate.clamp_count).sum();
    if clamps > 0 {
        eprintln!("warning: {clamps} portfolio clamping events; results may be biased");
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Config(format!("--workers: {e}")))?;
    }
    match cli.command {
        Command::Validate => {
            let report = run_validate(cli.seed.unwrap_or(DEFAULT_VALIDATE_SEED));
            for line in &report.lines {
                println!("{line}");
            }
            Ok(if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Compare => {
            let config = load_config(cli)?;
            let report = run_compare(&config, cli.out_dir.as_deref())?;
            print_compare(&report);
            Ok(if report.all_within_tolerance {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Simulate => {
            let config = load_config(cli)?;
            let report = run_simulate(&config, cli.out_dir.as_deref())?;
            print_compare(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::TemporalValue => {
            let config = load_config(cli)?;
            let report = run_temporal_value(&config, cli.out_dir.as_deref())?;
            for line in report.lines.iter().chain(report.summary.iter()) {
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep => {
            let config = load_config(cli)?;
            let report = run_sweep(&config, cli.out_dir.as_deref())?;
            for line in report.lines.iter().chain(report.summary.iter()) {
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
