//! Command-line front end: configuration, subcommands and output formats.

pub mod args;
pub mod commands;
pub mod config;
pub mod export;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{run, RunError};
pub use config::{Command, RunConfig, Settings};

/// Parses `argv`, resolves the configuration and runs it. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, flags) = cli.command.split();
    let file = match &flags.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match Settings::from_toml(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return 1;
                }
            },
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 1;
            }
        },
        None => Settings::default(),
    };
    let cfg = match RunConfig::resolve(command, file, flags.settings()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
