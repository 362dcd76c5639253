#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use zelf_cli::args::Cli;
use zelf_cli::config::{RunConfig, Settings};

// argv parsing and config resolution only; nothing is run
fuzz_target!(|data: &str| {
    let argv = std::iter::once("zelf").chain(data.split_whitespace());
    if let Ok(cli) = Cli::try_parse_from(argv) {
        let (cmd, flags) = cli.command.split();
        let _ = RunConfig::resolve(cmd, Settings::default(), flags.settings());
    }
});
