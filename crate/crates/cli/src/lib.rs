//! Command-line front end for `modineq`.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! input errors, 3 for internal or convergence errors.

pub mod args;
pub mod commands;
pub mod error;
pub mod instance_file;
pub mod report;

use std::process::ExitCode;

use args::{Cli, Command};
use error::Result;

pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Chernoff(a) => commands::chernoff(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    }
}

pub fn run(cli: &Cli) -> ExitCode {
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
