mod commands;
mod config;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmbounds_core::lattice::PrefixCost;
use gmbounds_core::LatticeMode;

use crate::commands::{Options, Output};
use crate::config::{Config, Task};
use crate::error::CliError;

/// Rate and LQG-cost bounds for quantized Gauss-Markov systems.
#[derive(Parser)]
#[command(name = "gmbounds", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-step rate allocation: t, lambda_t, D_t, R_t.
    Waterfill(Common),
    /// Lower rate bound and one achievable column per lattice.
    Bounds(Common),
    /// Riccati gains and LQG cost bounds at the allocated rates.
    Lqg(Common),
    /// Monte-Carlo check of the allocation with statistical verdicts.
    Simulate(Common),
    /// Steady-state quantities over a grid of D or R_inf.
    Sweep(Common),
    /// Run whatever `task` the config names.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (flat TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled config: fig3, fig5a or fig5b.
    #[arg(long)]
    preset: Option<String>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Drop the 1/p prefix-free coding overhead from the lattice gap.
    #[arg(long)]
    no_prefix_term: bool,
    /// Replace the config's lattice list (repeatable).
    #[arg(long = "lattice", value_name = "MODE")]
    lattices: Vec<LatticeMode>,
    /// Write raw ECDQ index counts as CSV (simulate only).
    #[arg(long)]
    histograms: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<Config, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => Config::load(path)?,
            (None, Some(name)) => Config::preset(name)?,
            _ => return Err(CliError::Usage("give one of --config or --preset".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(trials) = self.trials {
            cfg.trials = Some(trials);
        }
        if !self.lattices.is_empty() {
            cfg.lattice = Some(self.lattices.clone());
        }
        if self.no_prefix_term {
            cfg.prefix_term = Some(false);
        }
        Ok(cfg)
    }
}

fn dispatch(task: Task, cfg: &Config) -> Result<Output, CliError> {
    let opts = Options {
        prefix: if cfg.prefix_term.unwrap_or(true) {
            PrefixCost::Included
        } else {
            PrefixCost::Omitted
        },
    };
    match task {
        Task::Waterfill => commands::waterfill(cfg),
        Task::Bounds => commands::bounds(cfg, &opts),
        Task::Lqg => commands::lqg(cfg, &opts),
        Task::Simulate => commands::simulate(cfg),
        Task::Sweep => commands::sweep(cfg, &opts),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (task, common) = match cli.command {
        Command::Waterfill(c) => (Some(Task::Waterfill), c),
        Command::Bounds(c) => (Some(Task::Bounds), c),
        Command::Lqg(c) => (Some(Task::Lqg), c),
        Command::Simulate(c) => (Some(Task::Simulate), c),
        Command::Sweep(c) => (Some(Task::Sweep), c),
        Command::Run(c) => (None, c),
    };
    let cfg = common.load()?;
    let task = task
        .or(cfg.task)
        .ok_or_else(|| CliError::Config("missing key `task`".into()))?;
    let output = dispatch(task, &cfg)?;
    match &common.out {
        Some(path) => std::fs::write(path, &output.body)?,
        None => print!("{}", output.body),
    }
    if let (Some(path), Some(csv)) = (&common.histograms, &output.histograms) {
        std::fs::write(path, csv)?;
    }
    for note in &output.notes {
        eprintln!("{note}");
    }
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
