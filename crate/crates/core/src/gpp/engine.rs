//! Built-in two-player board games: Connect-Four family and Hex.
//!
//! Both are stone-placement games on a small grid, so they share one state
//! type. Black moves first. A move is a `u16`: the column for Connect-Four,
//! the cell index `row * size + col` for Hex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::Role;

pub type Move = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ongoing,
    BlackWins,
    WhiteWins,
    Draw,
}

impl Status {
    /// Black's score for a finished game.
    pub fn black_score(self) -> Option<f64> {
        match self {
            Status::Ongoing => None,
            Status::BlackWins => Some(1.0),
            Status::WhiteWins => Some(0.0),
            Status::Draw => Some(0.5),
        }
    }

    fn win_for(role: Role) -> Self {
        match role {
            Role::Black => Status::BlackWins,
            Role::White => Status::WhiteWins,
        }
    }
}

const EMPTY: u8 = 0;

fn stone(role: Role) -> u8 {
    match role {
        Role::Black => 1,
        Role::White => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoardState {
    cells: Vec<u8>,
    to_move: Role,
    status: Status,
    plies: u16,
}

impl BoardState {
    pub fn to_move(&self) -> Role {
        self.to_move
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn plies(&self) -> u16 {
        self.plies
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GameEngine {
    /// Drop stones into columns; `connect` in a row wins, full board draws.
    ConnectFour { width: u8, height: u8, connect: u8 },
    /// Black joins top and bottom edges, White joins left and right.
    Hex { size: u8 },
}

impl GameEngine {
    pub const DEFAULT_CONNECT_FOUR: GameEngine = GameEngine::ConnectFour {
        width: 5,
        height: 4,
        connect: 3,
    };
    pub const DEFAULT_HEX: GameEngine = GameEngine::Hex { size: 5 };

    pub fn connect_four(width: u8, height: u8, connect: u8) -> Result<Self> {
        if width == 0 || height == 0 || connect < 2 || connect > width.max(height) {
            return Err(Error::invalid(format!(
                "bad connect-four geometry {width}x{height} connect {connect}"
            )));
        }
        if u16::from(width) * u16::from(height) > 256 {
            return Err(Error::invalid("connect-four board too large"));
        }
        Ok(GameEngine::ConnectFour {
            width,
            height,
            connect,
        })
    }

    pub fn hex(size: u8) -> Result<Self> {
        if !(1..=16).contains(&size) {
            return Err(Error::invalid(format!("hex size {size} outside 1..=16")));
        }
        Ok(GameEngine::Hex { size })
    }

    /// Canonical name: `hex<N>` or `c4-<W>x<H>-<K>`.
    pub fn name(&self) -> String {
        self.to_string()
    }

    fn cell_count(&self) -> usize {
        match *self {
            GameEngine::ConnectFour { width, height, .. } => width as usize * height as usize,
            GameEngine::Hex { size } => size as usize * size as usize,
        }
    }

    pub fn initial_state(&self) -> BoardState {
        BoardState {
            cells: vec![EMPTY; self.cell_count()],
            to_move: Role::Black,
            status: Status::Ongoing,
            plies: 0,
        }
    }

    /// Legal moves in ascending order; empty iff the game is over.
    pub fn legal_moves(&self, s: &BoardState) -> Vec<Move> {
        let mut out = Vec::new();
        self.legal_moves_into(s, &mut out);
        out
    }

    pub fn legal_moves_into(&self, s: &BoardState, out: &mut Vec<Move>) {
        out.clear();
        if s.status != Status::Ongoing {
            return;
        }
        match *self {
            GameEngine::ConnectFour { width, height, .. } => {
                let top_row = (height as usize - 1) * width as usize;
                for c in 0..width as usize {
                    if s.cells[top_row + c] == EMPTY {
                        out.push(c as Move);
                    }
                }
            }
            GameEngine::Hex { .. } => {
                out.extend(
                    s.cells
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c == EMPTY)
                        .map(|(i, _)| i as Move),
                );
            }
        }
    }

    pub fn is_legal(&self, s: &BoardState, mv: Move) -> bool {
        if s.status != Status::Ongoing {
            return false;
        }
        match *self {
            GameEngine::ConnectFour { width, height, .. } => {
                (mv as usize) < width as usize
                    && s.cells[(height as usize - 1) * width as usize + mv as usize] == EMPTY
            }
            GameEngine::Hex { .. } => s.cells.get(mv as usize) == Some(&EMPTY),
        }
    }

    pub fn terminal(&self, s: &BoardState) -> Status {
        s.status
    }

    /// Successor state; the input is left untouched.
    pub fn apply(&self, s: &BoardState, mv: Move) -> Result<BoardState> {
        let mut next = s.clone();
        self.apply_in_place(&mut next, mv)?;
        Ok(next)
    }

    pub fn apply_in_place(&self, s: &mut BoardState, mv: Move) -> Result<()> {
        if !self.is_legal(s, mv) {
            return Err(Error::InvalidCall(format!(
                "illegal move {} in {}",
                self.format_move(mv),
                self.name()
            )));
        }
        let role = s.to_move;
        let cell = match *self {
            GameEngine::ConnectFour { width, .. } => {
                let w = width as usize;
                let mut idx = mv as usize;
                while s.cells[idx] != EMPTY {
                    idx += w;
                }
                idx
            }
            GameEngine::Hex { .. } => mv as usize,
        };
        s.cells[cell] = stone(role);
        s.plies += 1;
        s.to_move = role.other();
        if self.wins_through(s, cell) {
            s.status = Status::win_for(role);
        } else if s.cells.iter().all(|&c| c != EMPTY) {
            // Full Hex boards always contain a winning chain, so only
            // Connect-Four reaches this.
            s.status = Status::Draw;
        }
        Ok(())
    }

    fn wins_through(&self, s: &BoardState, cell: usize) -> bool {
        match *self {
            GameEngine::ConnectFour {
                width,
                height,
                connect,
            } => {
                let (w, h) = (width as i32, height as i32);
                let (r0, c0) = ((cell as i32) / w, (cell as i32) % w);
                let me = s.cells[cell];
                let at = |r: i32, c: i32| -> bool {
                    r >= 0 && r < h && c >= 0 && c < w && s.cells[(r * w + c) as usize] == me
                };
                [(0, 1), (1, 0), (1, 1), (1, -1)].iter().any(|&(dr, dc)| {
                    let mut run = 1;
                    for sign in [1, -1] {
                        let (mut r, mut c) = (r0 + sign * dr, c0 + sign * dc);
                        while at(r, c) {
                            run += 1;
                            r += sign * dr;
                            c += sign * dc;
                        }
                    }
                    run >= connect as i32
                })
            }
            GameEngine::Hex { size } => hex_connects(&s.cells, size as usize, cell),
        }
    }

    pub fn format_move(&self, mv: Move) -> String {
        match *self {
            GameEngine::ConnectFour { .. } => mv.to_string(),
            GameEngine::Hex { size } => {
                let n = size as u16;
                format!("{},{}", mv / n, mv % n)
            }
        }
    }

    pub fn parse_move(&self, token: &str) -> Result<Move> {
        let bad = || Error::Parse(format!("bad move token {token:?} for {}", self.name()));
        match *self {
            GameEngine::ConnectFour { width, .. } => {
                let c: u16 = token.parse().map_err(|_| bad())?;
                if c >= width as u16 {
                    return Err(bad());
                }
                Ok(c)
            }
            GameEngine::Hex { size } => {
                let (r, c) = token.split_once(',').ok_or_else(bad)?;
                let r: u16 = r.parse().map_err(|_| bad())?;
                let c: u16 = c.parse().map_err(|_| bad())?;
                let n = size as u16;
                if r >= n || c >= n {
                    return Err(bad());
                }
                Ok(r * n + c)
            }
        }
    }
}

/// Does the group containing `cell` touch both of its owner's edges?
fn hex_connects(cells: &[u8], n: usize, cell: usize) -> bool {
    let me = cells[cell];
    let black = me == stone(Role::Black);
    let mut seen = vec![false; cells.len()];
    let mut stack = vec![cell];
    seen[cell] = true;
    let (mut low, mut high) = (false, false);
    while let Some(x) = stack.pop() {
        let (r, c) = ((x / n) as isize, (x % n) as isize);
        let edge_coord = if black { r } else { c };
        low |= edge_coord == 0;
        high |= edge_coord == n as isize - 1;
        if low && high {
            return true;
        }
        for (dr, dc) in [(-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0)] {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr >= n as isize || nc >= n as isize {
                continue;
            }
            let y = nr as usize * n + nc as usize;
            if !seen[y] && cells[y] == me {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

impl fmt::Display for GameEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GameEngine::ConnectFour {
                width,
                height,
                connect,
            } => {
                write!(f, "c4-{width}x{height}-{connect}")
            }
            GameEngine::Hex { size } => write!(f, "hex{size}"),
        }
    }
}

impl FromStr for GameEngine {
    type Err = Error;

    /// Accepts `hex<N>`, `c4-<W>x<H>-<K>`, `connect4` (7x6, four in a row)
    /// and `connect3` (the 5x4 three-in-a-row default).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown game {s:?}"));
        match s {
            "connect4" => return GameEngine::connect_four(7, 6, 4),
            "connect3" => return Ok(GameEngine::DEFAULT_CONNECT_FOUR),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("hex") {
            let n: u8 = n.parse().map_err(|_| bad())?;
            return GameEngine::hex(n).map_err(|e| Error::InvalidConfig(e.to_string()));
        }
        if let Some(rest) = s.strip_prefix("c4-") {
            let (dims, k) = rest.split_once('-').ok_or_else(bad)?;
            let (w, h) = dims.split_once('x').ok_or_else(bad)?;
            let w: u8 = w.parse().map_err(|_| bad())?;
            let h: u8 = h.parse().map_err(|_| bad())?;
            let k: u8 = k.parse().map_err(|_| bad())?;
            return GameEngine::connect_four(w, h, k)
                .map_err(|e| Error::InvalidConfig(e.to_string()));
        }
        Err(bad())
    }
}
