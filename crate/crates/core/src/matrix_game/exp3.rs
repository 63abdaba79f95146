//! Approximate solver: two EXP3 learners in self-play.
//!
//! Each side only sees the payoff of the joint action it sampled and feeds
//! an importance-weighted loss estimate `loss / prob` back into its own
//! exponential weights. The time-averaged strategies approach an
//! equilibrium at rate `sqrt(K log K / T)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Equilibrium, Method, MixedStrategy, PayoffMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum LearningRate {
    /// `eta_t = sqrt(ln K / (K t))`, no horizon needed.
    #[default]
    Anytime,
    /// Fixed `eta` for every step.
    Constant(f64),
}

impl LearningRate {
    fn eta(self, arms: usize, t: u64) -> f64 {
        match self {
            LearningRate::Anytime => {
                let k = arms as f64;
                (k.ln() / (k * t as f64)).sqrt()
            }
            LearningRate::Constant(eta) => eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub iterations: u64,
    pub learning_rate: LearningRate,
    pub seed: u64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            learning_rate: LearningRate::Anytime,
            seed: 0,
        }
    }
}

/// Runs the self-play learners for `iterations` steps with seed 0.
pub fn solve_approx(
    m: &PayoffMatrix,
    iterations: u64,
    learning_rate: LearningRate,
) -> Result<Equilibrium> {
    solve_approx_with(
        m,
        &ApproxConfig {
            iterations,
            learning_rate,
            seed: 0,
        },
    )
}

pub fn solve_approx_with(m: &PayoffMatrix, config: &ApproxConfig) -> Result<Equilibrium> {
    if config.iterations == 0 {
        return Err(Error::invalid(
            "approximate solver needs at least one iteration",
        ));
    }
    if let LearningRate::Constant(eta) = config.learning_rate {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid("learning rate must be finite and positive"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut row = Learner::new(m.rows());
    let mut col = Learner::new(m.cols());

    for t in 1..=config.iterations {
        row.refresh(config.learning_rate.eta(m.rows(), t));
        col.refresh(config.learning_rate.eta(m.cols(), t));
        let i = row.sample(&mut rng);
        let j = col.sample(&mut rng);
        let x = m.get(i, j);
        row.observe(i, 1.0 - x);
        col.observe(j, x);
    }

    Equilibrium::from_pair(m, row.average()?, col.average()?, Method::Exp3Approx)
}

struct Learner {
    /// Cumulative importance-weighted loss estimates.
    losses: Vec<f64>,
    probs: Vec<f64>,
    prob_sum: Vec<f64>,
}

impl Learner {
    fn new(arms: usize) -> Self {
        Self {
            losses: vec![0.0; arms],
            probs: vec![1.0 / arms as f64; arms],
            prob_sum: vec![0.0; arms],
        }
    }

    fn refresh(&mut self, eta: f64) {
        let lo = self.losses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (p, l) in self.probs.iter_mut().zip(&self.losses) {
            *p = (-eta * (l - lo)).exp();
            total += *p;
        }
        for (p, s) in self.probs.iter_mut().zip(&mut self.prob_sum) {
            *p /= total;
            *s += *p;
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left u above the last partial sum.
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    fn observe(&mut self, arm: usize, loss: f64) {
        self.losses[arm] += loss / self.probs[arm];
    }

    fn average(&self) -> Result<MixedStrategy> {
        MixedStrategy::from_weights(self.prob_sum.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_game::{exploitability, solve_exact};

    #[test]
    fn one_iteration_is_valid() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let eq = solve_approx(&m, 1, LearningRate::Anytime).unwrap();
        assert_eq!(eq.row_strategy.len(), 2);
        assert!(eq.residual <= 1.0);
        assert_eq!(eq.method, Method::Exp3Approx);
    }

    #[test]
    fn zero_iterations_rejected() {
        let m = PayoffMatrix::from_rows(vec![vec![0.5]]).unwrap();
        assert!(solve_approx(&m, 0, LearningRate::Anytime).is_err());
        assert!(solve_approx(&m, 10, LearningRate::Constant(-1.0)).is_err());
    }

    #[test]
    fn matching_pennies_converges() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let exact = solve_exact(&m).unwrap();
        let eq = solve_approx(&m, 100_000, LearningRate::Anytime).unwrap();
        let e = exploitability(&m, &eq.row_strategy, &eq.col_strategy, exact.value).unwrap();
        assert!(e.average <= 0.02, "{e:?}");
        assert!((eq.row_strategy.probs()[0] - 0.5).abs() < 0.02);
    }

    #[test]
    fn deterministic_given_seed() {
        let m = PayoffMatrix::from_rows(vec![vec![0.2, 0.9], vec![0.7, 0.4]]).unwrap();
        let a = solve_approx(&m, 1000, LearningRate::Anytime).unwrap();
        let b = solve_approx(&m, 1000, LearningRate::Anytime).unwrap();
        assert_eq!(a, b);
    }
}
