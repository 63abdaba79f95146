//! Vanilla UCT agent with per-move keyed randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::{BoardState, GameEngine, Move, Status};
use crate::digest::derive_seed;
use crate::error::{Error, Result};
use crate::portfolio::Role;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MctsParams {
    pub simulations: u32,
    pub exploration: f64,
    pub seed: u64,
}

struct Node {
    mv: Move,
    /// Player who played `mv` into this node.
    mover: Role,
    children: Vec<usize>,
    untried: Vec<Move>,
    visits: u32,
    /// Sum of rewards for `mover`.
    reward: f64,
}

/// Generator for one decision; a pure function of `(seed, move_index)`.
pub fn move_rng(seed: u64, move_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[move_index]))
}

/// Runs `params.simulations` UCT iterations from `state` and returns the
/// most visited root move (lowest move on ties).
pub fn choose_move(
    engine: &GameEngine,
    state: &BoardState,
    params: &MctsParams,
    move_index: u64,
) -> Result<Move> {
    if state.status() != Status::Ongoing {
        return Err(Error::InvalidCall(
            "no move to choose in a finished game".into(),
        ));
    }
    let root_moves = engine.legal_moves(state);
    if root_moves.len() == 1 {
        return Ok(root_moves[0]);
    }
    let mut rng = move_rng(params.seed, move_index);
    let mut nodes = vec![Node {
        mv: 0,
        mover: state.to_move().other(),
        children: Vec::new(),
        untried: root_moves,
        visits: 0,
        reward: 0.0,
    }];
    let mut path = Vec::new();
    let mut scratch = Vec::new();

    for _ in 0..params.simulations.max(1) {
        let mut s = state.clone();
        let mut node = 0;
        path.clear();
        path.push(0);

        // Selection.
        while nodes[node].untried.is_empty() && !nodes[node].children.is_empty() {
            let log_n = (nodes[node].visits as f64).ln();
            let mut best = nodes[node].children[0];
            let mut best_ucb = f64::NEG_INFINITY;
            for &c in &nodes[node].children {
                let ch = &nodes[c];
                let ucb = ch.reward / ch.visits as f64
                    + params.exploration * (log_n / ch.visits as f64).sqrt();
                if ucb > best_ucb || (ucb == best_ucb && ch.mv < nodes[best].mv) {
                    best = c;
                    best_ucb = ucb;
                }
            }
            engine.apply_in_place(&mut s, nodes[best].mv)?;
            node = best;
            path.push(node);
        }

        // Expansion.
        if !nodes[node].untried.is_empty() {
            let k = rng.random_range(0..nodes[node].untried.len());
            let mv = nodes[node].untried.swap_remove(k);
            let mover = s.to_move();
            engine.apply_in_place(&mut s, mv)?;
            let child = nodes.len();
            nodes.push(Node {
                mv,
                mover,
                children: Vec::new(),
                untried: engine.legal_moves(&s),
                visits: 0,
                reward: 0.0,
            });
            nodes[node].children.push(child);
            path.push(child);
        }

        // Rollout.
        while s.status() == Status::Ongoing {
            engine.legal_moves_into(&s, &mut scratch);
            let mv = scratch[rng.random_range(0..scratch.len())];
            engine.apply_in_place(&mut s, mv)?;
        }
        let black = s
            .status()
            .black_score()
            .expect("rollout ends in a finished game");

        for &n in &path {
            let nd = &mut nodes[n];
            nd.visits += 1;
            nd.reward += match nd.mover {
                Role::Black => black,
                Role::White => 1.0 - black,
            };
        }
    }

    let root = &nodes[0];
    let mut best = root.children[0];
    for &c in &root.children {
        let (a, b) = (&nodes[c], &nodes[best]);
        if a.visits > b.visits || (a.visits == b.visits && a.mv < b.mv) {
            best = c;
        }
    }
    Ok(nodes[best].mv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64, sims: u32) -> MctsParams {
        MctsParams {
            simulations: sims,
            exploration: std::f64::consts::SQRT_2,
            seed,
        }
    }

    #[test]
    fn single_legal_move() {
        let e = GameEngine::connect_four(3, 1, 3).unwrap();
        let mut s = e.initial_state();
        e.apply_in_place(&mut s, 0).unwrap();
        e.apply_in_place(&mut s, 2).unwrap();
        assert_eq!(choose_move(&e, &s, &params(1, 50), 2).unwrap(), 1);
    }

    #[test]
    fn finished_game_is_invalid_call() {
        let e = GameEngine::DEFAULT_CONNECT_FOUR;
        let mut s = e.initial_state();
        for mv in [0, 1, 0, 1, 0] {
            e.apply_in_place(&mut s, mv).unwrap();
        }
        assert!(matches!(
            choose_move(&e, &s, &params(1, 50), 5),
            Err(Error::InvalidCall(_))
        ));
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let e = GameEngine::DEFAULT_HEX;
        let s = e.initial_state();
        let a = choose_move(&e, &s, &params(42, 200), 0).unwrap();
        let b = choose_move(&e, &s, &params(42, 200), 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finds_immediate_connect_four_win() {
        let e = GameEngine::DEFAULT_CONNECT_FOUR;
        let mut s = e.initial_state();
        // Black stacks column 3 twice, White plays elsewhere: column 3 wins.
        for mv in [3, 0, 3, 4] {
            e.apply_in_place(&mut s, mv).unwrap();
        }
        let winning: Vec<Move> = e
            .legal_moves(&s)
            .into_iter()
            .filter(|&mv| e.apply(&s, mv).unwrap().status() == Status::BlackWins)
            .collect();
        assert_eq!(winning, vec![3]);
        let hits = (0..100)
            .filter(|&seed| choose_move(&e, &s, &params(seed, 300), 4).unwrap() == 3)
            .count();
        assert!(hits >= 99, "{hits}");
    }
}
