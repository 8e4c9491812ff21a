//! Library side of the `homodyne-lab` command-line tool.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

use args::{Cli, Command};

/// Process exit status: 0 all checks pass, 1 a check was violated,
/// 2 usage or configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    Violated = 1,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Violated
        }
    }
}

pub const EXIT_USAGE: i32 = 2;

/// Invalid arguments, configuration or I/O; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError(pub String);

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self(message.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<homodyne_core::Error> for CliError {
    fn from(e: homodyne_core::Error) -> Self {
        Self(e.to_string())
    }
}

pub fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Capacity(a) => commands::capacity::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
        Command::VerifyLogsob(a) => commands::logsob::run(a),
        Command::VerifyOptimality(a) => commands::optimality::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome as i32,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
