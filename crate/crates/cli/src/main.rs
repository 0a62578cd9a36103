mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};
use error::CliError;

/// Sets the worker count for replica parallelism.
const THREADS_VAR: &str = "CW_SPECTRA_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        CliError::Config(format!(
            "{THREADS_VAR} must be a positive integer, got '{value}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let args = cli.command.args();
    match &cli.command {
        Command::Spectrum(_) => match &args.input {
            Some(path) => {
                let (record, x) = commands::load_spins(path)?;
                let cfg = RunConfig::with_shape(
                    args,
                    record.beta,
                    record.p,
                    record.n,
                    record.restandardized,
                )?;
                commands::spectrum(&cfg, Some((record, x)))
            }
            None => commands::spectrum(&RunConfig::from_args(args)?, None),
        },
        Command::Sample(_) => commands::sample(&RunConfig::from_args(args)?),
        Command::Compare(_) => commands::compare(&RunConfig::from_args(args)?),
        Command::Correlations(_) => commands::correlations(&RunConfig::from_args(args)?),
        Command::Bounds(_) => commands::bounds(&RunConfig::from_args(args)?),
        Command::Figure(_) => commands::figure(&RunConfig::from_args(args)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cw-spectra {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
