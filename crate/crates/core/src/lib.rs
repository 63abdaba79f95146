//! Seed portfolios for randomized game-playing programs.
//!
//! A stochastic game-playing program becomes a family of deterministic
//! programs once its random seed is fixed at the start of each game. This
//! crate measures such a family as a pairwise payoff matrix, combines the
//! family offline (Nash, BestArm, BestHalf, Uniform) or online (UCBT), and
//! stress-tests the combinations against held-out opponents and exploiters.
//!
//! Modules:
//! - [`matrix_game`]: 1-sum matrix games, exact and approximate solvers,
//!   best responses and exploitability.
//! - [`portfolio`]: offline portfolio policies and per-game sampling.
//! - [`bandit`]: the UCBT online portfolio.
//! - [`gpp`]: built-in games, a seeded MCTS agent and the external engine
//!   line protocol.
//! - [`harness`]: matrix construction and the evaluation experiments.

pub mod bandit;
pub mod digest;
pub mod error;
pub mod gpp;
pub mod harness;
pub mod matrix_game;
pub mod portfolio;
pub mod stats;

pub use bandit::{run_online, OnlineRun, UcbtState};
pub use error::{Error, Result};
pub use gpp::{GameEngine, GameRecord, GppSpec};
pub use matrix_game::{
    best_response_col, best_response_row, exploitability, solve_approx, solve_exact, Equilibrium,
    Exploitability, Method, MixedStrategy, PayoffMatrix,
};
pub use portfolio::{PolicyBundle, PolicyKind, PortfolioPolicy, Role};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
