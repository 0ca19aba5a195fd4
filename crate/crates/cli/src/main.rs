//! `mpssim`: run circuit files, Grover experiments and scaling sweeps.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BenchArgs, GroverArgs, RunArgs};

#[derive(Parser, Debug)]
#[command(name = "mpssim", version, about = "Tensor-product quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a circuit file `--shots` times.
    Run(RunArgs),
    /// Grover search with a per-iteration probability trace.
    Grover(GroverArgs),
    /// Time Grover runs over a grid of register sizes and solution counts.
    Bench(BenchArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed circuit, invalid Grover parameters or configuration.
    Input(String),
    Exec(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Exec(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => commands::run(args),
        Command::Grover(args) => commands::grover(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Input(m) => ("invalid input", m),
                CliError::Exec(m) => ("execution failed", m),
                CliError::Io(m) => ("i/o error", m),
            };
            eprintln!("mpssim: {kind}: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
