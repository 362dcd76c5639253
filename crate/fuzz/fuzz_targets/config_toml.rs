#![no_main]

use libfuzzer_sys::fuzz_target;
use zelf_cli::config::{Command, RunConfig, Settings};

fuzz_target!(|data: &str| {
    let Ok(file) = Settings::from_toml(data) else { return };
    for cmd in [Command::Field, Command::Simulate, Command::Equilibria, Command::Limits, Command::Sweep] {
        if let Ok(cfg) = RunConfig::resolve(cmd, file.clone(), Settings::default()) {
            let back: RunConfig = serde_json::from_str(&cfg.to_json()).expect("config json roundtrip");
            assert_eq!(back.to_json(), cfg.to_json());
        }
    }
});
