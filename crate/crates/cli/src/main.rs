use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(propm_cli::run(propm_cli::Cli::parse()))
}
