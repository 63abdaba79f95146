//! Pairwise payoff matrices from populations of players.

use rayon::prelude::*;

use super::config::VariantOptions;
use crate::digest::derive_seed;
use crate::error::{Error, Result};
use crate::gpp::{play_game, GameEngine, GppSpec};
use crate::matrix_game::PayoffMatrix;
use crate::portfolio::Role;
use crate::stats;

/// One axis of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    /// Deterministic players: the built-in agent under fixed seeds.
    Seeds { seeds: Vec<u64>, simulations: u32 },
    /// Stochastic players: a fresh seed is drawn for every game.
    Variants(Vec<VariantOptions>),
    /// Explicit specs, used as given for every game.
    Specs(Vec<(String, GppSpec)>),
}

impl Population {
    pub fn len(&self) -> usize {
        match self {
            Population::Seeds { seeds, .. } => seeds.len(),
            Population::Variants(v) => v.len(),
            Population::Specs(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Population::Variants(_))
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            Population::Seeds { seeds, .. } => seeds.iter().map(|s| format!("seed{s}")).collect(),
            Population::Variants(v) => v.iter().map(|o| o.name.clone()).collect(),
            Population::Specs(s) => s.iter().map(|(l, _)| l.clone()).collect(),
        }
    }

    /// Spec of member `index` for game `repeat` of cell `(i, j)`.
    fn spec(
        &self,
        index: usize,
        cell: (usize, usize),
        repeat: u32,
        role: Role,
        master: u64,
    ) -> GppSpec {
        match self {
            Population::Seeds { seeds, simulations } => GppSpec::mcts(seeds[index], *simulations),
            Population::Variants(v) => {
                let o = &v[index];
                let role_tag = match role {
                    Role::Black => 0,
                    Role::White => 1,
                };
                let seed = derive_seed(
                    master,
                    &[cell.0 as u64, cell.1 as u64, repeat as u64, role_tag],
                );
                GppSpec::mcts(seed, o.simulations).with_exploration(o.exploration)
            }
            Population::Specs(s) => s[index].1.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBuild {
    pub matrix: PayoffMatrix,
    /// Standard error of each cell mean, row-major; zero when `repeats == 1`.
    pub std_errors: Vec<f64>,
    /// Games actually played per cell.
    pub repeats: u32,
    pub games: u64,
    pub warnings: Vec<String>,
}

impl MatrixBuild {
    pub fn max_std_error(&self) -> f64 {
        self.std_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Plays every `(black i, white j)` pairing `repeats` times.
///
/// With deterministic players on both sides a repeat reproduces the first
/// game exactly, so `repeats` is coerced to 1 and a warning is recorded.
/// Cells run in parallel; the result does not depend on scheduling.
pub fn build_matrix(
    engine: &GameEngine,
    black: &Population,
    white: &Population,
    repeats: u32,
    master_seed: u64,
) -> Result<MatrixBuild> {
    if black.is_empty() || white.is_empty() {
        return Err(Error::InvalidConfig("empty player population".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    let mut repeats = repeats;
    if black.is_deterministic() && white.is_deterministic() && repeats > 1 {
        let msg = format!(
            "deterministic players: repeats {repeats} coerced to 1 (every repeat replays the same game)"
        );
        log::warn!("{msg}");
        warnings.push(msg);
        repeats = 1;
    }

    let (nb, nw) = (black.len(), white.len());
    let cells: Vec<(usize, usize)> = (0..nb).flat_map(|i| (0..nw).map(move |j| (i, j))).collect();
    let results: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut scores = Vec::with_capacity(repeats as usize);
            for r in 0..repeats {
                let b = black.spec(i, (i, j), r, Role::Black, master_seed);
                let w = white.spec(j, (i, j), r, Role::White, master_seed);
                let rec = play_game(engine, &b, &w)?;
                scores.push(rec.black_score);
            }
            Ok((stats::mean(&scores), stats::std_error(&scores)))
        })
        .collect();

    let mut entries = Vec::with_capacity(cells.len());
    let mut std_errors = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for (&(i, j), res) in cells.iter().zip(results) {
        match res {
            Ok((m, se)) => {
                entries.push(m);
                std_errors.push(se);
            }
            Err(e) => {
                failures.push(format!("({i}, {j}): {e}"));
                entries.push(f64::NAN);
                std_errors.push(f64::NAN);
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::EngineFailure {
            message: format!(
                "{} of {} cells failed; partial matrix discarded. First failures: {}",
                failures.len(),
                cells.len(),
                failures
                    .iter()
                    .take(5)
                    .cloned()
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
            partial: None,
        });
    }
    let matrix = PayoffMatrix::from_flat(nb, nw, entries, black.labels(), white.labels())?;
    Ok(MatrixBuild {
        matrix,
        std_errors,
        repeats,
        games: (nb * nw) as u64 * repeats as u64,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(n: u64, sims: u32) -> Population {
        Population::Seeds {
            seeds: (1..=n).collect(),
            simulations: sims,
        }
    }

    #[test]
    fn deterministic_repeats_are_coerced() {
        let e = GameEngine::hex(3).unwrap();
        let b = build_matrix(&e, &seeds(2, 20), &seeds(2, 20), 10, 0).unwrap();
        assert_eq!(b.repeats, 1);
        assert_eq!(b.warnings.len(), 1);
        assert_eq!(b.games, 4);
        assert!(b.std_errors.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn rebuild_is_identical() {
        let e = GameEngine::DEFAULT_CONNECT_FOUR;
        let a = build_matrix(&e, &seeds(4, 30), &seeds(4, 30), 1, 0).unwrap();
        let b = build_matrix(&e, &seeds(4, 30), &seeds(4, 30), 1, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variants_have_standard_errors() {
        let e = GameEngine::hex(3).unwrap();
        let v = Population::Variants(vec![
            VariantOptions {
                name: "a".into(),
                simulations: 5,
                exploration: 1.0,
            },
            VariantOptions {
                name: "b".into(),
                simulations: 20,
                exploration: 1.4,
            },
        ]);
        let b = build_matrix(&e, &v, &v, 16, 3).unwrap();
        assert_eq!(b.repeats, 16);
        assert!(b.warnings.is_empty());
        assert_eq!(b.matrix.row_labels(), &["a".to_string(), "b".to_string()]);
        // sample sd of 16 Bernoulli draws is at most sqrt(16 / 60)
        assert!(b.max_std_error() <= (16.0f64 / 60.0).sqrt() / 4.0 + 1e-12);
    }

    #[test]
    fn engine_failure_aborts_build() {
        let e = GameEngine::hex(3).unwrap();
        let bad = Population::Specs(vec![(
            "broken".into(),
            GppSpec::external(1, vec!["/nonexistent/engine".into()]),
        )]);
        let err = build_matrix(&e, &bad, &seeds(1, 5), 1, 0).unwrap_err();
        assert!(matches!(err, Error::EngineFailure { .. }));
    }
}
