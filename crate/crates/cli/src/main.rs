mod commands;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Weak values, effective operators and error witnesses from a JSON problem file.
///
/// Machine-readable JSON (or CSV) goes to standard output and a short summary
/// to standard error. Exit codes: 0 success, 1 failed reproduction, 2 malformed
/// input, 3 domain error (orthogonal states, undefined phase, mixed-state phase),
/// 4 numerical failure.
#[derive(Parser)]
#[command(name = "weakval", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (JSON). Use `-` for standard input.
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,

    /// Shots per estimate [default: options.shots, else 10000].
    #[arg(long, global = true, value_name = "N")]
    shots: Option<u64>,

    /// RNG seed [default: options.seed, else 42].
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Orthogonality threshold on |<phi|psi>|^2 [default: options.epsilon_orth, else 1e-12].
    #[arg(long, global = true, value_name = "X")]
    epsilon_orth: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Forward and reverse weak values, their product, modulus and phase.
    WeakValue,
    /// The operator B = A P_psi A (or A rho A) and its structure.
    EffectiveOp,
    /// Ideal versus noisy expectation of B after a gate exp(-i theta A).
    Witness,
    /// Re-run the two appendix circuits with shot noise and compare to exact values.
    ReproduceAppendix,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<weakval::Error> for CliError {
    fn from(e: weakval::Error) -> Self {
        let code = if e.is_domain() {
            3
        } else if e.is_numerical() {
            4
        } else {
            2
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::WeakValue => commands::weak_value(&cli),
        Command::EffectiveOp => commands::effective_op(&cli),
        Command::Witness => commands::witness(&cli),
        Command::ReproduceAppendix => commands::reproduce_appendix(&cli),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.summary);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
