mod bound;
mod gen;
mod run;
mod sidecar;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Partition function bounds by gauged weighted mini-bucket elimination.
#[derive(Parser, Debug)]
#[command(name = "gmbe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random model as a UAI file.
    Gen(gen::GenArgs),
    /// Compute or optimize a bound on ln Z.
    Bound(bound::BoundArgs),
    /// Check bounds against brute-force enumeration.
    Verify(verify::VerifyArgs),
    /// Run an experiment grid and write a CSV table.
    Sweep(sweep::SweepArgs),
}

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Gen(a) => gen::cmd_gen(&a),
        Command::Bound(a) => bound::cmd_bound(&a),
        Command::Verify(a) => verify::cmd_verify(&a),
        Command::Sweep(a) => sweep::cmd_sweep(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
