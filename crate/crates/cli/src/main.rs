mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn dispatch(cli: &Cli) -> CliResult<()> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    }
    if !(cli.global.epsilon_exponent >= 0.0) || !cli.global.epsilon_exponent.is_finite() {
        return Err(CliError::Invalid("--epsilon-exponent must be finite and >= 0".into()));
    }
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => commands::gen::run(g, a),
        Command::Bounds(a) => commands::bounds::run(g, a),
        Command::Simulate(a) => commands::simulate::run(g, a),
        Command::Oracle(a) => commands::oracle::run(g, a),
        Command::Sweep(a) => commands::sweep::run(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
