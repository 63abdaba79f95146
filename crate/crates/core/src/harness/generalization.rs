//! Portfolios learned on a `K x K` block, evaluated on the held-out options.
//!
//! Evaluation is analytic: the full matrix already holds the outcome of
//! every pairing, so expectations are exact rather than sampled.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::derive_seed;
use crate::error::{Error, Result};
use crate::matrix_game::io::matrix_digest;
use crate::matrix_game::{MixedStrategy, PayoffMatrix};
use crate::portfolio::{
    build_best_arm, build_best_half, build_exploiter, build_nash, build_uniform_for, PolicyKind,
    PortfolioPolicy, Role,
};
use crate::stats;

pub const EVALUATED: [PolicyKind; 4] = [
    PolicyKind::Nash,
    PolicyKind::BestArm,
    PolicyKind::BestHalf,
    PolicyKind::Uniform,
];

/// One `(K, policy)` line; rates are role-balanced means over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationRow {
    pub k: usize,
    pub policy: PolicyKind,
    pub win_vs_uniform: f64,
    pub win_vs_uniform_se: f64,
    pub exploiter_loss: f64,
    pub exploiter_loss_se: f64,
    pub black_win_vs_uniform: f64,
    pub white_win_vs_uniform: f64,
    pub black_exploiter_loss: f64,
    pub white_exploiter_loss: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationReport {
    pub rows: Vec<GeneralizationRow>,
    pub matrix_digest: String,
    pub master_seed: u64,
}

impl GeneralizationReport {
    pub fn get(&self, k: usize, policy: PolicyKind) -> Option<&GeneralizationRow> {
        self.rows.iter().find(|r| r.k == k && r.policy == policy)
    }
}

/// Scores of one policy in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldOutScore {
    pub black_win_vs_uniform: f64,
    pub white_win_vs_uniform: f64,
    /// Black policy's loss rate against the best held-out White option.
    pub black_exploiter_loss: f64,
    pub white_exploiter_loss: f64,
}

/// A learning split: which rows and columns the portfolio may see.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub learn_rows: Vec<usize>,
    pub learn_cols: Vec<usize>,
    pub held_rows: Vec<usize>,
    pub held_cols: Vec<usize>,
}

impl Split {
    /// The leading `K x K` block.
    pub fn leading(m: &PayoffMatrix, k: usize) -> Self {
        Self::from_learning(m, (0..k).collect(), (0..k).collect())
    }

    /// `K` rows and `K` columns drawn uniformly without replacement.
    pub fn random(m: &PayoffMatrix, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut rows = sample(rng, m.rows(), k).into_vec();
        let mut cols = sample(rng, m.cols(), k).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        Self::from_learning(m, rows, cols)
    }

    fn from_learning(m: &PayoffMatrix, learn_rows: Vec<usize>, learn_cols: Vec<usize>) -> Self {
        let held_rows = (0..m.rows()).filter(|i| !learn_rows.contains(i)).collect();
        let held_cols = (0..m.cols()).filter(|j| !learn_cols.contains(j)).collect();
        Self {
            learn_rows,
            learn_cols,
            held_rows,
            held_cols,
        }
    }
}

/// Evaluates a policy learned on the split's learning block.
pub fn score_policy(
    m: &PayoffMatrix,
    split: &Split,
    policy: &PortfolioPolicy,
) -> Result<HeldOutScore> {
    // Black policy over learning rows vs held-out columns.
    let black_block = m.submatrix(&split.learn_rows, &split.held_cols)?;
    let u_cols = MixedStrategy::uniform(split.held_cols.len())?;
    let black_win_vs_uniform = black_block.expected(&policy.black_strategy, &u_cols)?;
    let (_, exploiter_win) = build_exploiter(&black_block, &policy.black_strategy, Role::Black)?;

    // White policy over learning columns vs held-out rows.
    let white_block = m.submatrix(&split.held_rows, &split.learn_cols)?;
    let u_rows = MixedStrategy::uniform(split.held_rows.len())?;
    let white_win_vs_uniform = 1.0 - white_block.expected(&u_rows, &policy.white_strategy)?;
    let (_, exploiter_win_white) =
        build_exploiter(&white_block, &policy.white_strategy, Role::White)?;

    Ok(HeldOutScore {
        black_win_vs_uniform,
        white_win_vs_uniform,
        black_exploiter_loss: exploiter_win,
        white_exploiter_loss: exploiter_win_white,
    })
}

/// Builds the evaluated policies on the split's learning block.
pub fn learn_policies(
    m: &PayoffMatrix,
    split: &Split,
) -> Result<Vec<(PolicyKind, PortfolioPolicy)>> {
    let learn = m.submatrix(&split.learn_rows, &split.learn_cols)?;
    Ok(vec![
        (PolicyKind::Nash, build_nash(&learn)?),
        (PolicyKind::BestArm, build_best_arm(&learn)?),
        (PolicyKind::BestHalf, build_best_half(&learn)?),
        (PolicyKind::Uniform, build_uniform_for(&learn)?),
    ])
}

/// Runs `replications` learning splits for every `K` in `k_grid`.
///
/// With a single replication the leading block is used; otherwise blocks
/// are drawn from a generator keyed by `(master_seed, K, replication)`.
pub fn generalization_experiment(
    m_full: &PayoffMatrix,
    k_grid: &[usize],
    replications: usize,
    master_seed: u64,
) -> Result<GeneralizationReport> {
    let n = m_full.rows().min(m_full.cols());
    if let Some(&k) = k_grid.iter().find(|&&k| k == 0 || k >= n) {
        return Err(Error::InvalidConfig(format!(
            "learning-set size {k} must be in 1..{n}"
        )));
    }
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &k in k_grid {
        let per_rep: Vec<Vec<HeldOutScore>> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let split = if replications == 1 {
                    Split::leading(m_full, k)
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        master_seed,
                        &[k as u64, rep as u64],
                    ));
                    Split::random(m_full, k, &mut rng)
                };
                learn_policies(m_full, &split)?
                    .iter()
                    .map(|(_, p)| score_policy(m_full, &split, p))
                    .collect()
            })
            .collect::<Result<_>>()?;

        for (slot, &policy) in EVALUATED.iter().enumerate() {
            let col = |f: fn(&HeldOutScore) -> f64| -> Vec<f64> {
                per_rep.iter().map(|r| f(&r[slot])).collect()
            };
            let bw = col(|s| s.black_win_vs_uniform);
            let ww = col(|s| s.white_win_vs_uniform);
            let bl = col(|s| s.black_exploiter_loss);
            let wl = col(|s| s.white_exploiter_loss);
            let win: Vec<f64> = bw.iter().zip(&ww).map(|(a, b)| 0.5 * (a + b)).collect();
            let loss: Vec<f64> = bl.iter().zip(&wl).map(|(a, b)| 0.5 * (a + b)).collect();
            rows.push(GeneralizationRow {
                k,
                policy,
                win_vs_uniform: stats::mean(&win),
                win_vs_uniform_se: stats::std_error(&win),
                exploiter_loss: stats::mean(&loss),
                exploiter_loss_se: stats::std_error(&loss),
                black_win_vs_uniform: stats::mean(&bw),
                white_win_vs_uniform: stats::mean(&ww),
                black_exploiter_loss: stats::mean(&bl),
                white_exploiter_loss: stats::mean(&wl),
                replications,
            });
        }
    }
    Ok(GeneralizationReport {
        rows,
        matrix_digest: matrix_digest(m_full),
        master_seed,
    })
}
