//! Front end for `onecopy-core`: argument parsing, execution and emission.
//!
//! Exit codes are 0 on success, 1 for usage errors, 2 for numerical or I/O
//! failures and 3 when a `check` fails.

pub mod args;
pub mod commands;
pub mod emit;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O failure: {m}"),
        }
    }
}

impl From<onecopy_core::Error> for CliError {
    fn from(e: onecopy_core::Error) -> Self {
        use onecopy_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::InvalidModel(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match run_cli(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let config = RunConfig::resolve(cli)?;
    let outcome = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| commands::execute(&config))?,
        None => commands::execute(&config)?,
    };
    for line in &outcome.log {
        let _ = writeln!(stderr, "{line}");
    }
    emit::write_output(&outcome.bytes, &config.destination, stdout).map_err(|e| CliError::Io(e.to_string()))?;
    if outcome.failed_rows > 0 {
        let _ = writeln!(stderr, "numerical failure: {} scan rows failed", outcome.failed_rows);
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if outcome.check_failed { EXIT_CHECK } else { EXIT_OK })
}
