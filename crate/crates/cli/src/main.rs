//! `qlt`: command-line front end for the qlaplace library.
//!
//! Exit status: 0 on success, 1 when a hard assertion fails (the table is
//! still written), 2 for invalid input, 3 for numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod grid;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

use crate::args::{Cli, Command, OutputArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] qlaplace::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QLT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "QLT_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn emit(outcome: &commands::Outcome, out: &OutputArgs) -> Result<(), CliError> {
    let with_meta = !out.no_meta;
    match &out.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                CliError::Config(format!("cannot create '{}': {e}", path.display()))
            })?;
            let mut w = BufWriter::new(file);
            outcome.table.write(&mut w, out.format, with_meta)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            outcome.table.write(&mut w, out.format, with_meta)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    configure_threads()?;
    let (outcome, out) = match &cli.command {
        Command::Transform(a) => (commands::transform(a)?, &a.output),
        Command::Invert(a) => (commands::invert(a)?, &a.output),
        Command::Roundtrip(a) => (commands::roundtrip_cmd(a)?, &a.output),
        Command::Identities(a) => (commands::identities(a)?, &a.output),
        Command::Statmech(a) => (commands::statmech(a)?, &a.output),
    };
    emit(&outcome, out)?;
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    let argv = match args::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
