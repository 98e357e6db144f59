//! Command-line driver: scenario generation, experiment runs and parameter
//! sweeps for online graph-topology tracking.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 solver
//! divergence (the message carries the time index), 4 I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { message, code: 2 }
    }
    pub fn divergence(message: String) -> Self {
        CliError { message, code: 3 }
    }
    pub fn io(message: String) -> Self {
        CliError { message, code: 4 }
    }
    pub fn message(&self) -> &str {
        &self.message
    }
}

#[derive(Parser)]
#[command(
    name = "topotrack",
    about = "Track time-varying graph topologies from streaming signals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario file (truths, change times, signals).
    Generate {
        /// Config file (TOML); built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output scenario file.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override a config value, e.g. --set scenario.n=16 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the tracking experiment and write per-seed plus aggregate CSVs.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replay an exported scenario instead of generating per-seed ones.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory (default: run.out_dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run this single seed (replaces run.seeds).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a parameter grid and write one aggregate row per combination.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep spec (TOML with a [grid] table).
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            config,
            out,
            seed,
            mut set,
        } => {
            if let Some(s) = seed {
                set.push(format!("scenario.seed={s}"));
            }
            let cfg = config::load_config(config.as_deref(), &set)?;
            commands::cmd_generate(&cfg, &out)
        }
        Command::Run {
            config,
            scenario,
            out,
            seed,
            mut set,
        } => {
            if let Some(s) = seed {
                set.push(format!("run.seeds={s}"));
            }
            let cfg = config::load_config(config.as_deref(), &set)?;
            let out_dir = commands::resolve_out_dir(out, &cfg);
            commands::cmd_run(&cfg, scenario.as_deref(), &out_dir)
        }
        Command::Sweep {
            config,
            sweep,
            out,
            set,
        } => {
            let cfg = config::load_config(config.as_deref(), &set)?;
            let out_dir = commands::resolve_out_dir(out, &cfg);
            commands::cmd_sweep(&cfg, &sweep, &out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code)
        }
    }
}
