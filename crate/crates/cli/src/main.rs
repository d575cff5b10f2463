//! `ama`: command-line driver for the mobilization simulator.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ama", version, about = "Seeded simulation, design search and falsification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (TOML); the built-in ama-default community scenario when omitted.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Master seed; overrides `run.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replications; overrides `run.reps`.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write per-agent CSV traces.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the social graph and export it as an edge list.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the scenario's design over the replications.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Constrained grid search over the scenario's design space.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Budget; overrides the scenario's.
        #[arg(long)]
        budget: Option<f64>,
        /// Toxicity ceiling; overrides the scenario's.
        #[arg(long)]
        toxicity_limit: Option<f64>,
    },
    /// Best-response dynamics between the scenario's two players.
    Game {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
    },
    /// Run falsification tests.
    Falsify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        test: commands::TestArgs,
    },
    /// Simulate a panel (or read one) and fit the structural equations.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Replications pooled into the simulated panel.
        #[arg(long, default_value_t = 1)]
        panels: usize,
        /// Agent CSV of an existing panel (requires --edges).
        #[arg(long, requires = "edges")]
        agents: Option<PathBuf>,
        /// Edge CSV of an existing panel.
        #[arg(long, requires = "agents")]
        edges: Option<PathBuf>,
        /// Use factor scores instead of the true affect.
        #[arg(long)]
        measured: bool,
    },
    /// Empirical type-I error of falsification tests under their nulls.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        test: commands::TestArgs,
        #[arg(long, default_value_t = 400)]
        meta_reps: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Generate { common }
            | Command::Simulate { common }
            | Command::Optimize { common, .. }
            | Command::Game { common, .. }
            | Command::Falsify { common, .. }
            | Command::Estimate { common, .. }
            | Command::Calibrate { common, .. } => common,
        }
    }
}

fn run(cmd: Command) -> Result<(), String> {
    let common = cmd.common().clone();
    let ctx = commands::Context::load(&common).map_err(|e| e.to_string())?;
    let res = match cmd {
        Command::Generate { .. } => commands::generate(&ctx),
        Command::Simulate { .. } => commands::simulate(&ctx),
        Command::Optimize { budget, toxicity_limit, .. } => commands::optimize(&ctx, budget, toxicity_limit),
        Command::Game { max_iters, .. } => commands::game(&ctx, max_iters),
        Command::Falsify { test, .. } => commands::falsify(&ctx, &test),
        Command::Estimate { panels, agents, edges, measured, .. } => {
            commands::estimate(&ctx, panels, agents.zip(edges), measured)
        }
        Command::Calibrate { test, meta_reps, .. } => commands::calibrate(&ctx, &test, meta_reps),
    };
    res.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.command.common().jobs;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
