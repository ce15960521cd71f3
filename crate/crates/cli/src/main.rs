//! `mvmedian` command-line tool. Exit codes: 0 success, 2 invalid input,
//! 3 numerical failure.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ConfigFile, Merge};
use commands::Failure;

fn load_config(cli: &Cli) -> Result<ConfigFile, Failure> {
    let Some(path) = &cli.config else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli)?;
    if let Some(n) = cli.threads.or(config.threads) {
        if n == 0 {
            return Err(Failure::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    match cli.command {
        Command::Median(a) => commands::median(a.merge(config.median)),
        Command::Filter(a) => commands::filter(a.merge(config.filter)),
        Command::Pde(a) => commands::pde(a.merge(config.pde)),
        Command::Verify(a) => commands::verify(a.merge(config.verify)),
        Command::Depth(a) => commands::depth(a.merge(config.depth)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
