//! Command-line front end for `surfwl`: detection runs, method comparisons,
//! sizing tables and benchmark-scene downloads.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::{exit, CliError};

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Detect(a) => commands::cmd_detect(a, out),
        Command::Compare(a) => commands::cmd_compare(a, out),
        Command::Tables(a) => commands::cmd_tables(a, out),
        Command::FetchDataset(a) => commands::cmd_fetch(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors go to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
