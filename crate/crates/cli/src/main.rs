//! `moran`: simulate, sweep, asymptotics and bd-compare front ends.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod asymptotics;
mod bd;
mod output;
mod simulate;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "moran", version, about = "Moran model fitness simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one population and write its trajectory samples.
    Simulate(simulate::Args),
    /// Run a replicate sweep described by a JSON config.
    Sweep(sweep::Args),
    /// Evaluate the analytic diagnostics along a ladder of log10 N values.
    Asymptotics(asymptotics::Args),
    /// Compare the closed-form birth-death law with Monte Carlo.
    BdCompare(bd::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Asymptotics(a) => asymptotics::run(&a),
        Command::BdCompare(a) => bd::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
