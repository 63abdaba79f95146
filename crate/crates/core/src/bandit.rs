//! UCBT online portfolio.
//!
//! One arm per portfolio option. Each game the arm with the highest capped
//! UCB-Tuned score is played and its win/loss counters are updated:
//!
//! ```text
//! score(i) = min(1, r_i/n_i + sqrt(C log(4 t^rho) / n_i) / 100 + 16 log(4 t^rho) / (100 n_i))
//! ```
//!
//! with `C = 2`, `rho = 2.1`, natural logarithm and `X/0 = +inf`, so an
//! unplayed arm scores exactly 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EXPLORATION_CONSTANT: f64 = 2.0;
pub const EXPLORATION_EXPONENT: f64 = 2.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbtState {
    wins: Vec<u64>,
    plays: Vec<u64>,
    /// Index of the upcoming game, starting at 1.
    t: u64,
    exploration_constant: f64,
    exploration_exponent: f64,
}

impl UcbtState {
    pub fn new(arms: usize) -> Result<Self> {
        Self::with_constants(arms, EXPLORATION_CONSTANT, EXPLORATION_EXPONENT)
    }

    pub fn with_constants(arms: usize, c: f64, rho: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::invalid("bandit needs at least one arm"));
        }
        if !(c.is_finite() && c >= 0.0 && rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid(
                "exploration constants must be finite and positive",
            ));
        }
        Ok(Self {
            wins: vec![0; arms],
            plays: vec![0; arms],
            t: 1,
            exploration_constant: c,
            exploration_exponent: rho,
        })
    }

    pub fn arms(&self) -> usize {
        self.plays.len()
    }

    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn plays(&self) -> &[u64] {
        &self.plays
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.arms() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.arms(),
            });
        }
        Ok(())
    }

    /// Capped optimistic score of arm `i` at the current iteration.
    pub fn score(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.score_unchecked(i))
    }

    fn score_unchecked(&self, i: usize) -> f64 {
        let n = self.plays[i];
        if n == 0 {
            return 1.0;
        }
        let n = n as f64;
        let log_term = 4f64.ln() + self.exploration_exponent * (self.t as f64).ln();
        let raw = self.wins[i] as f64 / n
            + (self.exploration_constant * log_term / n).sqrt() / 100.0
            + 16.0 * log_term / (100.0 * n);
        raw.min(1.0)
    }

    fn mean(&self, i: usize) -> f64 {
        match self.plays[i] {
            0 => f64::INFINITY,
            n => self.wins[i] as f64 / n as f64,
        }
    }

    /// Arm with the highest score.
    ///
    /// Equal scores are common because of the cap at 1. They are broken by
    /// the higher empirical mean (unplayed arms count as +inf), then by fewer
    /// plays, then by lower index.
    pub fn select_arm(&self) -> usize {
        let mut best = 0;
        let mut best_score = self.score_unchecked(0);
        for i in 1..self.arms() {
            let s = self.score_unchecked(i);
            let better = if s != best_score {
                s > best_score
            } else {
                let (mi, mb) = (self.mean(i), self.mean(best));
                if mi != mb {
                    mi > mb
                } else {
                    self.plays[i] < self.plays[best]
                }
            };
            if better {
                best = i;
                best_score = s;
            }
        }
        best
    }

    pub fn update(&mut self, i: usize, won: bool) -> Result<()> {
        self.check(i)?;
        self.plays[i] += 1;
        if won {
            self.wins[i] += 1;
        }
        self.t += 1;
        Ok(())
    }
}

/// Outcome of an online run.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineRun {
    pub state: UcbtState,
    /// `(games played, cumulative losing rate)` at powers of two, plus the
    /// final game count when it is not a power of two.
    pub curve: Vec<(u64, f64)>,
    /// Win flag of every game, in order.
    pub outcomes: Vec<bool>,
}

impl OnlineRun {
    pub fn losing_rate(&self) -> f64 {
        let losses = self.outcomes.iter().filter(|w| !**w).count();
        losses as f64 / self.outcomes.len() as f64
    }
}

/// Checkpoints for a run of `games` games.
pub fn checkpoints(games: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 1u64;
    while c <= games {
        out.push(c);
        match c.checked_mul(2) {
            Some(n) => c = n,
            None => break,
        }
    }
    if out.last() != Some(&games) && games > 0 {
        out.push(games);
    }
    out
}

/// Plays `games` select/observe/update rounds.
///
/// `oracle(arm, game_index, rng)` reports whether the chosen arm won game
/// `game_index` (0-based); it draws any randomness from the supplied stream,
/// which is seeded from `rng_seed`.
pub fn run_online<F>(mut state: UcbtState, mut oracle: F, games: u64, rng_seed: u64) -> OnlineRun
where
    F: FnMut(usize, u64, &mut ChaCha8Rng) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let marks = checkpoints(games);
    let mut next_mark = 0;
    let mut curve = Vec::with_capacity(marks.len());
    let mut outcomes = Vec::with_capacity(games as usize);
    let mut losses = 0u64;
    for g in 0..games {
        let arm = state.select_arm();
        let won = oracle(arm, g, &mut rng);
        state.update(arm, won).expect("selected arm is in range");
        outcomes.push(won);
        if !won {
            losses += 1;
        }
        if next_mark < marks.len() && marks[next_mark] == g + 1 {
            curve.push((g + 1, losses as f64 / (g + 1) as f64));
            next_mark += 1;
        }
    }
    OnlineRun {
        state,
        curve,
        outcomes,
    }
}

/// Oracle for arms that win independently with fixed probabilities.
pub fn bernoulli_oracle(win_probs: Vec<f64>) -> impl FnMut(usize, u64, &mut ChaCha8Rng) -> bool {
    move |arm, _, rng| rng.random::<f64>() < win_probs[arm]
}
