//! Binary entry point: argument parsing and exit-code mapping.
//!
//! Exit codes: 0 clean (no violation found), 3 violation found, 2 unusable
//! input or arguments, 1 internal fault.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entwine::commands::{
    self, AdditivityArgs, CheckArgs, EofArgs, ImproveArgs, WoottersArgs,
};

/// Optimality tests for entanglement-of-formation decompositions.
#[derive(Debug, Parser)]
#[command(name = "entwine", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test whether an ensemble passes the decomposition-optimality gap test.
    Check(CheckArgs),
    /// Minimize average entanglement over decompositions of a density matrix.
    Eof(EofArgs),
    /// Closed-form two-qubit concurrence, EoF, and optimal decomposition.
    Wootters(WoottersArgs),
    /// Turn a violation certificate into a strictly better ensemble.
    Improve(ImproveArgs),
    /// Gap-test the tensor product of two ensembles.
    Additivity(AdditivityArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(args) => commands::cmd_check(args),
        Command::Eof(args) => commands::cmd_eof(args),
        Command::Wootters(args) => commands::cmd_wootters(args),
        Command::Improve(args) => commands::cmd_improve(args),
        Command::Additivity(args) => commands::cmd_additivity(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
