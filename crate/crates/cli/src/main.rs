mod commands;
mod config;
mod error;
mod setup;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

/// Experiment runner for the third-order wave model with memory.
#[derive(Debug, Parser)]
#[command(name = "jmgt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; omitted keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// `key.path=value`, applied after the config file.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and write the energy time series and a run summary.
    Simulate,
    /// Run the dissipation, generator, norm and contraction checks.
    Verify,
    /// Solve the resolvent equation for random data and report residuals.
    Resolvent,
    /// Picard iteration against direct integration.
    Picard,
    /// Decay rate over a grid of damping ratios and kernel masses.
    Scan,
    /// Manufactured-solution error tables in dt and N.
    Convergence,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| CliError::io(path, e))?),
        None => None,
    };
    let config = RunConfig::load(text.as_deref(), &cli.overrides, cli.seed)?;
    let ctx = Context::new(config, cli.out_dir, cli.quiet)?;
    match cli.command {
        Command::Simulate => commands::simulate_cmd(&ctx),
        Command::Verify => commands::verify_cmd(&ctx),
        Command::Resolvent => commands::resolvent_cmd(&ctx),
        Command::Picard => commands::picard_cmd(&ctx),
        Command::Scan => commands::scan_cmd(&ctx),
        Command::Convergence => commands::convergence_cmd(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
