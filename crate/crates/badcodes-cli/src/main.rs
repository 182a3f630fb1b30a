//! `badcodes` command-line tool.
//!
//! Exit status: 0 on success, 2 for invalid input (including unknown flags
//! and bad config files), 1 for numerical failures.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::Cli;
use crate::error::CliError;

fn parse(argv: &[String]) -> Result<Cli, clap::Error> {
    let Some(path) = config::config_path(argv) else {
        return Cli::try_parse_from(argv);
    };
    let tokens = config::tokens_from_file(&path)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?;
    let app = Cli::command();
    let names: Vec<&str> = app.get_subcommands().map(|c| c.get_name()).collect();
    match argv.iter().skip(1).find(|a| names.contains(&a.as_str())) {
        Some(command) => Cli::try_parse_from(config::splice(argv, command, tokens)),
        None => Cli::try_parse_from(argv),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    badcodes::parallel::configure_threads(cli.threads).map_err(CliError::Numeric)?;
    let report = commands::run(&cli.command)?;
    let mut stdout = std::io::stdout().lock();
    for line in &report.summary {
        if let Err(e) = writeln!(stdout, "{line}") {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                break;
            }
            return Err(e.into());
        }
    }
    if let Some(path) = &cli.out {
        let resolved = toml::to_string(&cli.command)
            .map_err(|e| CliError::Numeric(format!("cannot render the resolved config: {e}")))?;
        let header = output::provenance(cli.command.name(), cli.command.seed(), &resolved, output::now());
        output::write_csv(path, &header, &report.table)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
