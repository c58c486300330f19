use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use znav_cli::commands::{self, Invocation};
use znav_cli::Result;

/// Navigation experiments in synthetic two-dimensional turbulence.
#[derive(Debug, Parser)]
#[command(name = "znav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the configured flow and save it.
    GenFlow {
        #[arg(short, long)]
        config: PathBuf,
        /// Output file; relative paths go under the output directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Train an actor-critic policy.
    Train {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Roll out a trained policy and summarize the ensemble.
    Eval {
        #[arg(short, long)]
        config: PathBuf,
        /// Defaults to the policy in the output directory.
        #[arg(short, long)]
        policy: Option<PathBuf>,
        /// Also dump every trajectory.
        #[arg(long)]
        trajectories: bool,
    },
    /// Run the optimal-navigation shooting ensemble.
    On {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        trajectories: bool,
    },
    /// Run both ensembles on the same flow and write a joint report.
    Compare {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        policy: Option<PathBuf>,
    },
    /// Export the Okubo-Weiss field on a grid.
    OwMap {
        #[arg(short, long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::GenFlow { config, out: path } => {
            commands::gen_flow(&Invocation::load(&config)?, path.as_deref(), &mut out)?;
        }
        Command::Train { config } => {
            commands::cmd_train(&Invocation::load(&config)?, &mut out)?;
        }
        Command::Eval {
            config,
            policy,
            trajectories,
        } => {
            commands::cmd_eval(&Invocation::load(&config)?, policy.as_deref(), trajectories, &mut out)?;
        }
        Command::On { config, trajectories } => {
            commands::cmd_on(&Invocation::load(&config)?, trajectories, &mut out)?;
        }
        Command::Compare { config, policy } => {
            commands::cmd_compare(&Invocation::load(&config)?, policy.as_deref(), &mut out)?;
        }
        Command::OwMap { config } => {
            commands::cmd_ow_map(&Invocation::load(&config)?, &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
