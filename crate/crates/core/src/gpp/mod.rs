//! Seedable game-playing programs and full-game play.

pub mod engine;
pub mod external;
pub mod mcts;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::portfolio::Role;

pub use engine::{BoardState, GameEngine, Move, Status};
pub use external::{serve, ExternalSession};
pub use mcts::{choose_move, MctsParams};

pub const DEFAULT_SIMULATIONS: u32 = 300;
pub const DEFAULT_MOVE_TIMEOUT_MS: u64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    MctsBuiltin,
    ExternalProcess,
}

/// A fully specified player: the seed fixes every random choice it makes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GppSpec {
    pub agent_kind: AgentKind,
    pub simulations_per_move: u32,
    pub seed: u64,
    #[serde(default = "default_exploration")]
    pub exploration: f64,
    /// Program and arguments for external agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_command: Option<Vec<String>>,
    #[serde(default = "default_timeout")]
    pub move_timeout_ms: u64,
}

fn default_exploration() -> f64 {
    std::f64::consts::SQRT_2
}

fn default_timeout() -> u64 {
    DEFAULT_MOVE_TIMEOUT_MS
}

impl GppSpec {
    pub fn mcts(seed: u64, simulations_per_move: u32) -> Self {
        Self {
            agent_kind: AgentKind::MctsBuiltin,
            simulations_per_move,
            seed,
            exploration: default_exploration(),
            external_command: None,
            move_timeout_ms: DEFAULT_MOVE_TIMEOUT_MS,
        }
    }

    pub fn external(seed: u64, command: Vec<String>) -> Self {
        Self {
            agent_kind: AgentKind::ExternalProcess,
            simulations_per_move: 0,
            seed,
            exploration: default_exploration(),
            external_command: Some(command),
            move_timeout_ms: DEFAULT_MOVE_TIMEOUT_MS,
        }
    }

    pub fn with_exploration(mut self, c: f64) -> Self {
        self.exploration = c;
        self
    }

    pub fn with_timeout_ms(mut self, ms: u64) -> Self {
        self.move_timeout_ms = ms;
        self
    }

    pub fn mcts_params(&self) -> MctsParams {
        MctsParams {
            simulations: self.simulations_per_move,
            exploration: self.exploration,
            seed: self.seed,
        }
    }

    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("spec serializes"))
    }
}

/// Deterministic summary of the effort spent in a game.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStats {
    pub plies: u32,
    pub black_simulations: u64,
    pub white_simulations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub engine: String,
    pub black: String,
    pub white: String,
    pub black_seed: u64,
    pub white_seed: u64,
    pub moves: Vec<String>,
    /// 1 black win, 0.5 draw, 0 white win.
    pub black_score: f64,
    /// Set when a player lost by submitting an illegal move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forfeit: Option<Role>,
    pub stats: GameStats,
}

impl GameRecord {
    pub fn white_score(&self) -> f64 {
        1.0 - self.black_score
    }

    /// Replays the moves and checks the recorded outcome.
    pub fn verify(&self, engine: &GameEngine) -> Result<()> {
        let mut s = engine.initial_state();
        for tok in &self.moves {
            let mv = engine.parse_move(tok)?;
            engine.apply_in_place(&mut s, mv)?;
        }
        let expected = match self.forfeit {
            Some(Role::Black) => Some(0.0),
            Some(Role::White) => Some(1.0),
            None => s.status().black_score(),
        };
        if expected != Some(self.black_score) {
            return Err(Error::InvalidInput(format!(
                "record outcome {} does not match replay ({expected:?})",
                self.black_score
            )));
        }
        Ok(())
    }
}

enum Agent {
    Builtin(MctsParams),
    External(Box<ExternalSession>),
}

impl Agent {
    fn start(engine: &GameEngine, spec: &GppSpec, role: Role) -> Result<Self> {
        match spec.agent_kind {
            AgentKind::MctsBuiltin => Ok(Agent::Builtin(spec.mcts_params())),
            AgentKind::ExternalProcess => Ok(Agent::External(Box::new(ExternalSession::start(
                engine, spec, role,
            )?))),
        }
    }
}

/// Plays one game to completion and returns its transcript.
///
/// An illegal move from an external agent forfeits the game; a crash,
/// timeout or protocol violation aborts it with the moves so far attached
/// to the error.
pub fn play_game(engine: &GameEngine, black: &GppSpec, white: &GppSpec) -> Result<GameRecord> {
    let mut record = GameRecord {
        engine: engine.name(),
        black: black.digest(),
        white: white.digest(),
        black_seed: black.seed,
        white_seed: white.seed,
        moves: Vec::new(),
        black_score: 0.5,
        forfeit: None,
        stats: GameStats::default(),
    };
    let mut agents = [
        Agent::start(engine, black, Role::Black)?,
        Agent::start(engine, white, Role::White)?,
    ];
    let mut state = engine.initial_state();
    let mut last: Option<Move> = None;

    while state.status() == Status::Ongoing {
        let role = state.to_move();
        let slot = match role {
            Role::Black => 0,
            Role::White => 1,
        };
        let ply = state.plies() as u64;
        let chosen = match &mut agents[slot] {
            Agent::Builtin(params) => {
                match role {
                    Role::Black => record.stats.black_simulations += params.simulations as u64,
                    Role::White => record.stats.white_simulations += params.simulations as u64,
                }
                Some(choose_move(engine, &state, params, ply)?)
            }
            Agent::External(session) => match session.request_move(last) {
                Ok(token) => engine
                    .parse_move(&token)
                    .ok()
                    .filter(|&mv| engine.is_legal(&state, mv)),
                Err(e) => return Err(attach_partial(e, &record)),
            },
        };
        let Some(mv) = chosen else {
            record.forfeit = Some(role);
            record.black_score = match role {
                Role::Black => 0.0,
                Role::White => 1.0,
            };
            break;
        };
        engine.apply_in_place(&mut state, mv)?;
        record.moves.push(engine.format_move(mv));
        last = Some(mv);
    }
    record.stats.plies = record.moves.len() as u32;
    if record.forfeit.is_none() {
        record.black_score = state.status().black_score().expect("game is over");
    }

    for (agent, role) in agents.iter_mut().zip([Role::Black, Role::White]) {
        if let Agent::External(session) = agent {
            let score = match role {
                Role::Black => record.black_score,
                Role::White => record.white_score(),
            };
            if let Err(e) = session.finish(score) {
                return Err(attach_partial(e, &record));
            }
        }
    }
    Ok(record)
}

fn attach_partial(e: Error, record: &GameRecord) -> Error {
    match e {
        Error::EngineFailure {
            message,
            partial: None,
        } => Error::EngineFailure {
            message,
            partial: Some(Box::new(record.clone())),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_game_is_deterministic_and_decisive() {
        let e = GameEngine::DEFAULT_HEX;
        let b = GppSpec::mcts(7, 100);
        let w = GppSpec::mcts(7, 100);
        let r1 = play_game(&e, &b, &w).unwrap();
        let r2 = play_game(&e, &b, &w).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
        assert_ne!(r1.black_score, 0.5);
        r1.verify(&e).unwrap();
        assert_eq!(r1.black_score + r1.white_score(), 1.0);
    }

    #[test]
    fn connect_four_records_replay() {
        let e = GameEngine::DEFAULT_CONNECT_FOUR;
        for seed in 0..10 {
            let r =
                play_game(&e, &GppSpec::mcts(seed, 60), &GppSpec::mcts(seed + 100, 60)).unwrap();
            r.verify(&e).unwrap();
            assert!([0.0, 0.5, 1.0].contains(&r.black_score));
            assert_eq!(r.stats.plies as usize, r.moves.len());
        }
    }

    #[test]
    fn spec_digest_tracks_seed() {
        assert_ne!(
            GppSpec::mcts(1, 300).digest(),
            GppSpec::mcts(2, 300).digest()
        );
        assert_eq!(
            GppSpec::mcts(1, 300).digest(),
            GppSpec::mcts(1, 300).digest()
        );
    }
}
