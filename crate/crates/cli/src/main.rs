//! `seedfolio`: build payoff matrices, solve them, and run the portfolio
//! experiments.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use seedfolio_core::harness::SeedRange;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "seedfolio",
    version,
    about = "Seed portfolios for game-playing programs"
)]
struct Cli {
    /// Worker threads for games and replications (default: logical CPUs).
    #[arg(long, global = true, env = "SEEDFOLIO_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play every black seed against every white seed and write the matrix CSV.
    BuildMatrix(BuildMatrixArgs),
    /// Solve a matrix and write the Nash, BestArm, BestHalf and Uniform policies.
    Solve(SolveArgs),
    /// Run an experiment suite from a JSON config.
    Experiment(ExperimentArgs),
    /// Serve the built-in agent over the line protocol on stdin/stdout.
    Engine(EngineArgs),
}

#[derive(Debug, clap::Args)]
struct BuildMatrixArgs {
    #[arg(long, default_value = "hex5")]
    game: String,
    #[arg(long, default_value = "1..16")]
    seeds_black: SeedRange,
    #[arg(long, default_value = "1..16")]
    seeds_white: SeedRange,
    /// Simulations per move of the built-in agent.
    #[arg(long, default_value_t = seedfolio_core::gpp::DEFAULT_SIMULATIONS)]
    sims: u32,
    /// Games per cell; forced to 1 for seeded agents.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Run this command as the agent for every seed instead of the built-in one.
    #[arg(long, value_name = "CMD")]
    agent_cmd: Option<String>,
    /// Per-move timeout for external agents, in milliseconds.
    #[arg(long, default_value_t = seedfolio_core::gpp::DEFAULT_MOVE_TIMEOUT_MS)]
    move_timeout_ms: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Lp,
    Exp3,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMethod::Lp)]
    method: SolveMethod,
    /// EXP3 iterations.
    #[arg(long, default_value_t = 100_000)]
    iterations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the equilibrium document here.
    #[arg(long)]
    equilibrium: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Generalization,
    Online,
    CrossEval,
}

#[derive(Debug, clap::Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    suite: Suite,
    /// Overrides the config's online opponent: nash, uniform or pure:<index>.
    #[arg(long)]
    opponent: Option<String>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EngineArgs {
    #[arg(long, default_value_t = seedfolio_core::gpp::DEFAULT_SIMULATIONS)]
    sims: u32,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let jobs = cli.jobs;
    match cli.command {
        Command::BuildMatrix(a) => commands::build_matrix(a, jobs),
        Command::Solve(a) => commands::solve(a),
        Command::Experiment(a) => commands::experiment(a, jobs),
        Command::Engine(a) => commands::engine(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seedfolio: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
