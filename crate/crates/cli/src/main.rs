//! `localregret` — experiment runner for projected online gradient descent
//! and its regret meters.

mod commands;
mod config;
mod csvio;
mod plot;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::OutputOptions;
use config::ExperimentConfig;

/// Exit codes: 0 success / all checks pass; 1 I/O failure or failed
/// verification checks; 2 invalid config or violated precondition;
/// 3 numeric failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    ChecksFailed(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::ChecksFailed(_) | CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Numeric(m)
            | CliError::ChecksFailed(m)
            | CliError::Io(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma1,
    Theorem1,
    Scenario1,
    Scenario2,
    Scenario3,
    Gradients,
    Windows,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Theorem1 => "theorem1",
            Suite::Scenario1 => "scenario1",
            Suite::Scenario2 => "scenario2",
            Suite::Scenario3 => "scenario3",
            Suite::Gradients => "gradients",
            Suite::Windows => "windows",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "localregret",
    about = "Projected online gradient descent: runs, regret meters, and bound verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOpts {
    /// Experiment config file (flat `key = value` format)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $LOCALREGRET_OUT, then `.`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot of the cumulative curves
    #[arg(long)]
    plot: bool,
    /// Overwrite existing output files for this run_id
    #[arg(long)]
    force: bool,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write trajectory, meter series, and summary
    Run {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a verification suite against the config's run
    Verify {
        #[command(flatten)]
        common: CommonOpts,
        /// Which suite to run
        #[arg(long)]
        suite: Suite,
    },
    /// Run one trajectory and emit Hazan-vs-proposed series side by side
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        /// Second config; must share the loss family and horizon
        #[arg(long = "config-b")]
        config_b: PathBuf,
    },
}

fn load_config(path: &PathBuf, seed_override: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_options(common: &CommonOpts) -> Result<OutputOptions, CliError> {
    let out_dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os("LOCALREGRET_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    Ok(OutputOptions {
        out_dir,
        plot: common.plot,
        force: common.force,
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common } => {
            let cfg = load_config(&common.config, common.seed)?;
            let opts = output_options(&common)?;
            commands::cmd_run(&cfg, &opts)
        }
        Command::Verify { common, suite } => {
            let cfg = load_config(&common.config, common.seed)?;
            let opts = output_options(&common)?;
            commands::cmd_verify(&cfg, suite, &opts)
        }
        Command::Compare { common, config_b } => {
            let cfg_a = load_config(&common.config, common.seed)?;
            let cfg_b = load_config(&config_b, common.seed)?;
            let opts = output_options(&common)?;
            commands::cmd_compare(&cfg_a, &cfg_b, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
