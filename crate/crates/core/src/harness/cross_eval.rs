//! Head-to-head comparison of the offline portfolios on one matrix.
//!
//! Every number is labelled with whose win rate it is and in which role, so
//! no entry depends on a reading convention.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::derive_seed;
use crate::error::Result;
use crate::matrix_game::io::matrix_digest;
use crate::matrix_game::{MixedStrategy, PayoffMatrix};
use crate::portfolio::{
    build_best_arm, build_best_half, build_nash, build_uniform_for, sample_index, PolicyKind,
    PortfolioPolicy, Role,
};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEntry {
    pub id: String,
    pub caption: String,
    pub black: PolicyKind,
    pub white: PolicyKind,
    /// Whose win rate `analytic` reports.
    pub reported_for: Role,
    pub analytic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_games: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEvaluation {
    pub value: f64,
    pub black_support: usize,
    pub white_support: usize,
    pub entries: Vec<CrossEntry>,
    pub matrix_digest: String,
}

struct Policies {
    nash: PortfolioPolicy,
    best_arm: PortfolioPolicy,
    best_half: PortfolioPolicy,
    uniform: PortfolioPolicy,
}

impl Policies {
    fn build(m: &PayoffMatrix) -> Result<Self> {
        Ok(Self {
            nash: build_nash(m)?,
            best_arm: build_best_arm(m)?,
            best_half: build_best_half(m)?,
            uniform: build_uniform_for(m)?,
        })
    }

    fn get(&self, kind: PolicyKind) -> &PortfolioPolicy {
        match kind {
            PolicyKind::Nash => &self.nash,
            PolicyKind::BestArm => &self.best_arm,
            PolicyKind::BestHalf => &self.best_half,
            PolicyKind::Uniform | PolicyKind::Exploiter => &self.uniform,
        }
    }
}

fn label(kind: PolicyKind) -> &'static str {
    match kind {
        PolicyKind::Nash => "Nash",
        PolicyKind::BestArm => "BestArm",
        PolicyKind::BestHalf => "BestHalf",
        PolicyKind::Uniform => "Uniform",
        PolicyKind::Exploiter => "Exploiter",
    }
}

/// `(id, black, white, reported_for)` of every row of the comparison table.
const MATCHUPS: [(&str, PolicyKind, PolicyKind, Role); 8] = [
    (
        "nash1_vs_unif2",
        PolicyKind::Nash,
        PolicyKind::Uniform,
        Role::Black,
    ),
    (
        "nash2_vs_unif1",
        PolicyKind::Uniform,
        PolicyKind::Nash,
        Role::Black,
    ),
    (
        "nash2_vs_bestarm1",
        PolicyKind::BestArm,
        PolicyKind::Nash,
        Role::White,
    ),
    (
        "nash1_vs_bestarm2",
        PolicyKind::Nash,
        PolicyKind::BestArm,
        Role::Black,
    ),
    (
        "nash2_vs_besthalf1",
        PolicyKind::BestHalf,
        PolicyKind::Nash,
        Role::White,
    ),
    (
        "nash1_vs_besthalf2",
        PolicyKind::Nash,
        PolicyKind::BestHalf,
        Role::Black,
    ),
    (
        "bestarm1_vs_unif2",
        PolicyKind::BestArm,
        PolicyKind::Uniform,
        Role::Black,
    ),
    (
        "unif1_vs_unif2",
        PolicyKind::Uniform,
        PolicyKind::Uniform,
        Role::Black,
    ),
];

/// Analytic win rates of the portfolio pairings on `m`.
pub fn cross_evaluate(m: &PayoffMatrix) -> Result<CrossEvaluation> {
    let pol = Policies::build(m)?;
    let value = m.expected(&pol.nash.black_strategy, &pol.nash.white_strategy)?;
    let mut entries = Vec::with_capacity(MATCHUPS.len());
    for (id, black, white, reported_for) in MATCHUPS {
        let p = &pol.get(black).black_strategy;
        let q = &pol.get(white).white_strategy;
        let black_rate = m.expected(p, q)?;
        let (who, whom, role, other) = match reported_for {
            Role::Black => (black, white, "Black", "White"),
            Role::White => (white, black, "White", "Black"),
        };
        entries.push(CrossEntry {
            id: id.to_owned(),
            caption: format!(
                "win rate of {} as {role} vs {} as {other}",
                label(who),
                label(whom)
            ),
            black,
            white,
            reported_for,
            analytic: match reported_for {
                Role::Black => black_rate,
                Role::White => 1.0 - black_rate,
            },
            simulated: None,
            simulated_se: None,
            simulated_games: None,
        });
    }
    Ok(CrossEvaluation {
        value,
        black_support: pol.nash.black_strategy.support().len(),
        white_support: pol.nash.white_strategy.support().len(),
        entries,
        matrix_digest: matrix_digest(m),
    })
}

/// Fills the simulated columns by sampling `games` games per entry.
///
/// Each game draws Black's option from Black's policy, White's from
/// White's, and scores it with `outcome(i, j, rng)` (Black's score). Pass a
/// closure that replays real games, or one that reads the matrix.
pub fn simulate_cross_evaluation<F>(
    m: &PayoffMatrix,
    report: &mut CrossEvaluation,
    games: usize,
    master_seed: u64,
    outcome: F,
) -> Result<()>
where
    F: Fn(usize, usize, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let pol = Policies::build(m)?;
    for (n, entry) in report.entries.iter_mut().enumerate() {
        let p: &MixedStrategy = &pol.get(entry.black).black_strategy;
        let q: &MixedStrategy = &pol.get(entry.white).white_strategy;
        let scores: Vec<f64> = (0..games)
            .into_par_iter()
            .map(|g| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[n as u64, g as u64]));
                let i = sample_index(p, &mut rng);
                let j = sample_index(q, &mut rng);
                let black = outcome(i, j, &mut rng)?;
                Ok(match entry.reported_for {
                    Role::Black => black,
                    Role::White => 1.0 - black,
                })
            })
            .collect::<Result<_>>()?;
        entry.simulated = Some(stats::mean(&scores));
        entry.simulated_se = Some(stats::std_error(&scores));
        entry.simulated_games = Some(games);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rps_all_half() {
        let m = PayoffMatrix::from_rows(vec![
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.5, 1.0],
            vec![1.0, 0.0, 0.5],
        ])
        .unwrap();
        let r = cross_evaluate(&m).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        for e in &r.entries {
            assert!((e.analytic - 0.5).abs() < 1e-12, "{}: {}", e.id, e.analytic);
        }
    }

    #[test]
    fn dominant_row() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let r = cross_evaluate(&m).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let e = r.entries.iter().find(|e| e.id == "nash1_vs_unif2").unwrap();
        assert!((e.analytic - 1.0).abs() < 1e-12);
        assert_eq!(r.black_support, 1);
    }

    #[test]
    fn captions_name_the_reported_side() {
        let m = PayoffMatrix::from_rows(vec![vec![0.7, 0.2], vec![0.4, 0.6]]).unwrap();
        let r = cross_evaluate(&m).unwrap();
        let e = r
            .entries
            .iter()
            .find(|e| e.id == "nash2_vs_bestarm1")
            .unwrap();
        assert_eq!(e.caption, "win rate of Nash as White vs BestArm as Black");
    }

    #[test]
    fn simulation_agrees_with_analytic() {
        let m = PayoffMatrix::from_rows(vec![vec![0.7, 0.2], vec![0.4, 0.6]]).unwrap();
        let mut r = cross_evaluate(&m).unwrap();
        simulate_cross_evaluation(&m, &mut r, 4000, 1, |i, j, _| Ok(m.get(i, j))).unwrap();
        for e in &r.entries {
            let (s, se) = (e.simulated.unwrap(), e.simulated_se.unwrap());
            assert!((s - e.analytic).abs() <= 4.0 * se + 1e-12, "{e:?}");
        }
    }
}
