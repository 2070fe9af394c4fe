//! `lbr`: command-line front end for counting-field spectra, braid
//! classification, exceptional points, jump statistics and retrieval.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::commands::Command;
use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lbr", version, about = "Counting-field Lindbladian spectra, braids and jump statistics")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration entry, e.g. `--set model.omega_d=0.03`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let config = RunConfig::load(&cli.config, &cli.overrides)?;
    let table = cli.command.run(&config)?;
    let ext = match config.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let dir = &config.output.directory;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    let path = dir.join(format!("{}-{}.{ext}", cli.command.name(), config.digest()));
    std::fs::write(&path, table.render(config.output.format))
        .map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
