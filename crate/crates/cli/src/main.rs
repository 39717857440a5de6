mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Command;
use crate::config::{Overrides, RunConfig};

/// Decomposition studies for planar vector fields with a limit cycle.
///
/// Exit status: 0 on success, 2 for invalid input, 3 when a computation
/// aborts (partial results are kept as `*.partial.csv`).
#[derive(Parser)]
#[command(name = "kappa", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Model name; overrides `model.name` (and drops its params if the name changes).
    #[arg(long, global = true)]
    model: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate one trajectory with RK4.
    Simulate,
    /// Detect the limit cycle.
    LimitCycle,
    /// Trace level sets of H from the limit cycle.
    Decompose,
    /// Linear decomposition at the fixed point.
    Linearize,
    /// Finite-difference Hamilton-Jacobi solvers.
    Hj,
    /// Compare level-set components with the SA-SDE potential.
    Compare,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::LimitCycle => Command::LimitCycle,
            Cmd::Decompose => Command::Decompose,
            Cmd::Linearize => Command::Linearize,
            Cmd::Hj => Command::Hj,
            Cmd::Compare => Command::Compare,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { model: cli.model, output: cli.output };
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(RunConfig::default()), RunConfig::from_path)
        .and_then(|c| c.apply(&overrides))
        .and_then(|c| commands::run(cli.command.into(), &c));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kappa: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
