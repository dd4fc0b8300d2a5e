// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use alemfs_cli::{cmd_mesh, cmd_run, cmd_sweep, exit, CliError, ExperimentConfig, Outcome};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "alemfs", version, about = "ALE-MFS curvature-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one preset to the final time.
    Run { config: PathBuf },
    /// Evaluate indicators over the r_s and node-count sweep lists.
    Sweep { config: PathBuf },
    /// Transport a mesh with the evolving domain and track its quality.
    Mesh { config: PathBuf },
}

type CommandFn = fn(&ExperimentConfig, &std::path::Path, bool) -> Result<Outcome, CliError>;

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (path, f): (_, CommandFn) = match &cli.command {
        Command::Run { config } => (config, cmd_run),
        Command::Sweep { config } => (config, cmd_sweep),
        Command::Mesh { config } => (config, cmd_mesh),
    };
    let config = ExperimentConfig::load(path)?;
    let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
    f(&config, &out, cli.quiet)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::CONFIG_ERROR
            } else {
                exit::SUCCESS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Outcome::Terminated(reason) = &outcome {
                eprintln!("terminated early: {reason}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::CONFIG_ERROR as u8)
        }
    }
}
