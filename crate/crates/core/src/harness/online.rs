//! UCBT learning curves against stationary opponents.
//!
//! Opponents are realized analytically: arm `i` wins each game
//! independently with its expected win rate against the opponent's mixed
//! strategy, read from the matrix.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{checkpoints, run_online, UcbtState};
use crate::digest::derive_seed;
use crate::error::{Error, Result};
use crate::matrix_game::io::matrix_digest;
use crate::matrix_game::{solve_exact, MixedStrategy, PayoffMatrix};
use crate::portfolio::Role;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OpponentKind {
    Nash,
    Uniform,
    /// A single option of the opponent's axis.
    Pure(usize),
}

impl FromStr for OpponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nash" => Ok(OpponentKind::Nash),
            "uniform" => Ok(OpponentKind::Uniform),
            _ => s
                .strip_prefix("pure:")
                .and_then(|i| i.parse().ok())
                .map(OpponentKind::Pure)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "opponent {s:?} is not one of nash, uniform, pure:<index>"
                    ))
                }),
        }
    }
}

impl fmt::Display for OpponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpponentKind::Nash => f.write_str("nash"),
            OpponentKind::Uniform => f.write_str("uniform"),
            OpponentKind::Pure(i) => write!(f, "pure:{i}"),
        }
    }
}

impl TryFrom<String> for OpponentKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OpponentKind> for String {
    fn from(o: OpponentKind) -> Self {
        o.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: u64,
    pub losing_rate_mean: f64,
    pub losing_rate_stddev: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineReport {
    pub opponent: OpponentKind,
    pub role: Role,
    pub iterations: u64,
    pub replications: usize,
    pub curve: Vec<CurvePoint>,
    /// Cumulative losing rate after the last game, averaged.
    pub terminal_losing_rate: f64,
    /// Expected win rate of each arm against the opponent.
    pub arm_win_rates: Vec<f64>,
    /// Win rate of the best single arm against the opponent.
    pub best_arm_rate: f64,
    /// Mean fraction of games spent on each arm.
    pub play_fractions: Vec<f64>,
    pub matrix_digest: String,
    pub master_seed: u64,
}

/// Opponent strategy on the axis opposite to `role`.
fn opponent_strategy(
    m: &PayoffMatrix,
    opponent: OpponentKind,
    role: Role,
) -> Result<MixedStrategy> {
    let len = match role {
        Role::Black => m.cols(),
        Role::White => m.rows(),
    };
    match opponent {
        OpponentKind::Uniform => MixedStrategy::uniform(len),
        OpponentKind::Pure(i) => MixedStrategy::pure(len, i),
        OpponentKind::Nash => {
            let eq = solve_exact(m)?;
            Ok(match role {
                Role::Black => eq.col_strategy,
                Role::White => eq.row_strategy,
            })
        }
    }
}

/// Expected win rate of each of `role`'s options against `opponent`.
pub fn arm_win_rates(m: &PayoffMatrix, opponent: &MixedStrategy, role: Role) -> Result<Vec<f64>> {
    match role {
        Role::Black => m.row_payoffs(opponent),
        Role::White => Ok(m
            .col_payoffs(opponent)?
            .into_iter()
            .map(|x| 1.0 - x)
            .collect()),
    }
}

/// Averaged UCBT learning curve of `role` against a stationary opponent.
pub fn online_experiment(
    m: &PayoffMatrix,
    opponent: OpponentKind,
    role: Role,
    iterations: u64,
    replications: usize,
    master_seed: u64,
) -> Result<OnlineReport> {
    if iterations == 0 || replications == 0 {
        return Err(Error::InvalidConfig(
            "iterations and replications must be >= 1".into(),
        ));
    }
    let opp = opponent_strategy(m, opponent, role)?;
    let rates = arm_win_rates(m, &opp, role)?;
    let arms = rates.len();

    let runs: Vec<(Vec<f64>, Vec<f64>)> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let rates = &rates;
            let run = run_online(
                UcbtState::new(arms).expect("at least one arm"),
                |arm, _, rng: &mut ChaCha8Rng| rng.random::<f64>() < rates[arm],
                iterations,
                derive_seed(master_seed, &[rep as u64]),
            );
            let curve = run.curve.iter().map(|&(_, r)| r).collect();
            let fractions = run
                .state
                .plays()
                .iter()
                .map(|&n| n as f64 / iterations as f64)
                .collect();
            (curve, fractions)
        })
        .collect();

    let marks = checkpoints(iterations);
    let curve: Vec<CurvePoint> = marks
        .iter()
        .enumerate()
        .map(|(c, &it)| {
            let xs: Vec<f64> = runs.iter().map(|(curve, _)| curve[c]).collect();
            CurvePoint {
                iteration: it,
                losing_rate_mean: stats::mean(&xs),
                losing_rate_stddev: stats::std_dev(&xs),
                replications,
            }
        })
        .collect();
    let play_fractions = (0..arms)
        .map(|a| stats::mean(&runs.iter().map(|(_, f)| f[a]).collect::<Vec<_>>()))
        .collect();
    let best_arm_rate = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(OnlineReport {
        opponent,
        role,
        iterations,
        replications,
        terminal_losing_rate: curve.last().map_or(f64::NAN, |p| p.losing_rate_mean),
        curve,
        arm_win_rates: rates,
        best_arm_rate,
        play_fractions,
        matrix_digest: matrix_digest(m),
        master_seed,
    })
}

/// One run against a single deterministic opponent option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureTrial {
    pub opponent: usize,
    pub losses: u64,
    /// 1-based index of the last lost game, if any.
    pub last_loss: Option<u64>,
}

/// Runs UCBT against opponent options that at least one arm beats with
/// certainty. Each replication draws such an opponent and shuffles the arm
/// order, so selection tie-breaks differ between replications.
pub fn pure_opponent_sweep(
    m: &PayoffMatrix,
    role: Role,
    games: u64,
    replications: usize,
    master_seed: u64,
) -> Result<Vec<PureTrial>> {
    let opponents: Vec<usize> = match role {
        Role::Black => (0..m.cols())
            .filter(|&j| (0..m.rows()).any(|i| m.get(i, j) == 1.0))
            .collect(),
        Role::White => (0..m.rows())
            .filter(|&i| (0..m.cols()).any(|j| m.get(i, j) == 0.0))
            .collect(),
    };
    if opponents.is_empty() {
        return Err(Error::InvalidInput(
            "no opponent option is beaten with certainty by any arm".into(),
        ));
    }
    let arms = match role {
        Role::Black => m.rows(),
        Role::White => m.cols(),
    };
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[rep as u64]));
            let opponent = opponents[rng.random_range(0..opponents.len())];
            let mut order: Vec<usize> = (0..arms).collect();
            order.shuffle(&mut rng);
            let win_rate = |arm: usize| match role {
                Role::Black => m.get(order[arm], opponent),
                Role::White => 1.0 - m.get(opponent, order[arm]),
            };
            let run = run_online(
                UcbtState::new(arms)?,
                |arm, _, rng: &mut ChaCha8Rng| rng.random::<f64>() < win_rate(arm),
                games,
                rng.random(),
            );
            let losses = run.outcomes.iter().filter(|w| !**w).count() as u64;
            let last_loss = run.outcomes.iter().rposition(|w| !*w).map(|g| g as u64 + 1);
            Ok(PureTrial {
                opponent,
                losses,
                last_loss,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opponent_parsing() {
        assert_eq!("nash".parse::<OpponentKind>().unwrap(), OpponentKind::Nash);
        assert_eq!(
            "pure:3".parse::<OpponentKind>().unwrap(),
            OpponentKind::Pure(3)
        );
        assert!("pure:x".parse::<OpponentKind>().is_err());
        assert!("best".parse::<OpponentKind>().is_err());
        assert_eq!(OpponentKind::Pure(7).to_string(), "pure:7");
    }

    #[test]
    fn white_rates_are_complements() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.25]]).unwrap();
        let p = MixedStrategy::pure(2, 0).unwrap();
        assert_eq!(arm_win_rates(&m, &p, Role::White).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn pure_opponent_is_learned() {
        let m = PayoffMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = online_experiment(&m, OpponentKind::Pure(0), Role::Black, 256, 20, 0).unwrap();
        assert!(r.terminal_losing_rate <= 2.0 / 256.0);
        assert_eq!(r.curve.last().unwrap().iteration, 256);
        assert_eq!(r.best_arm_rate, 1.0);
    }

    #[test]
    fn curves_are_reproducible() {
        let m = PayoffMatrix::from_rows(vec![vec![0.3, 0.8], vec![0.6, 0.4]]).unwrap();
        let a = online_experiment(&m, OpponentKind::Uniform, Role::White, 512, 8, 9).unwrap();
        let b = online_experiment(&m, OpponentKind::Uniform, Role::White, 512, 8, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_needs_a_beatable_opponent() {
        let m = PayoffMatrix::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        assert!(pure_opponent_sweep(&m, Role::Black, 16, 2, 0).is_err());
        let trials = pure_opponent_sweep(&m, Role::White, 16, 3, 0).unwrap();
        assert!(trials.iter().all(|t| t.losses == 0));
    }
}
