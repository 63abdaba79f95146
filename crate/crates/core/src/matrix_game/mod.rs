//! Finite 1-sum matrix games.
//!
//! The row player (Black, first mover) receives `M[i][j]`, the column player
//! receives `1 - M[i][j]`. Entries are win rates in `[0, 1]`.

mod exp3;
pub mod io;
mod lp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exp3::{solve_approx, solve_approx_with, ApproxConfig, LearningRate};
pub use lp::solve_exact;

/// Residual budget of the exact solver.
pub const EXACT_TOLERANCE: f64 = 1e-8;

/// Allowed drift of a strategy's total mass before renormalization.
pub const NORMALIZATION_DRIFT: f64 = 1e-9;

/// A `K x K'` matrix of row-player win rates with option labels per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl PayoffMatrix {
    /// Builds a matrix from row vectors, labelling options `0..K` and `0..K'`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let k_prime = rows.first().map_or(0, Vec::len);
        let row_labels = (0..k).map(|i| i.to_string()).collect();
        let col_labels = (0..k_prime).map(|j| j.to_string()).collect();
        Self::with_labels(rows, row_labels, col_labels)
    }

    pub fn with_labels(
        rows: Vec<Vec<f64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let k = rows.len();
        let k_prime = rows.first().map_or(0, Vec::len);
        if k == 0 || k_prime == 0 {
            return Err(Error::invalid(
                "payoff matrix must have at least one row and one column",
            ));
        }
        let mut entries = Vec::with_capacity(k * k_prime);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k_prime {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {k_prime}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::from_flat(k, k_prime, entries, row_labels, col_labels)
    }

    /// Row-major constructor.
    pub fn from_flat(
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "payoff matrix must have at least one row and one column",
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some((n, x)) = entries
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && (0.0..=1.0).contains(*x)))
        {
            return Err(Error::invalid(format!(
                "entry ({}, {}) = {x} is outside [0, 1]",
                n / cols,
                n % cols
            )));
        }
        check_labels("row", &row_labels, rows)?;
        check_labels("column", &col_labels, cols)?;
        Ok(Self {
            rows,
            cols,
            entries,
            row_labels,
            col_labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, x) in sums.iter_mut().zip(self.row(i)) {
                *s += x;
            }
        }
        sums
    }

    /// `M q`: payoff of each pure row against the column strategy.
    pub fn row_payoffs(&self, q: &MixedStrategy) -> Result<Vec<f64>> {
        check_len(self.cols, q.len())?;
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), q.probs()))
            .collect())
    }

    /// `pᵀ M`: row-player payoff against each pure column.
    pub fn col_payoffs(&self, p: &MixedStrategy) -> Result<Vec<f64>> {
        check_len(self.rows, p.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &pi) in p.probs().iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += pi * x;
            }
        }
        Ok(out)
    }

    /// `pᵀ M q`.
    pub fn expected(&self, p: &MixedStrategy, q: &MixedStrategy) -> Result<f64> {
        let mq = self.row_payoffs(q)?;
        check_len(self.rows, p.len())?;
        Ok(dot(p.probs(), &mq))
    }

    /// The submatrix on the given row and column indices, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        for &i in rows {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.rows,
                });
            }
        }
        for &j in cols {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: self.cols,
                });
            }
        }
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.get(i, j)))
            .collect();
        Self::from_flat(
            rows.len(),
            cols.len(),
            entries,
            rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
        )
    }

    /// The game seen from the column player: `1 - Mᵀ`.
    pub fn swapped_roles(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(1.0 - self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Applies `x -> a x + b` to every entry; the result must stay in `[0, 1]`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        Self::from_flat(
            self.rows,
            self.cols,
            self.entries.iter().map(|x| a * x + b).collect(),
            self.row_labels.clone(),
            self.col_labels.clone(),
        )
    }

    /// True when every entry is exactly equal.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|&x| x == self.entries[0])
    }
}

fn check_labels(axis: &str, labels: &[String], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::invalid(format!(
            "{axis} labels: expected {n}, got {}",
            labels.len()
        )));
    }
    let mut seen = std::collections::HashSet::with_capacity(n);
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::invalid(format!("duplicate {axis} label {l:?}")));
        }
    }
    Ok(())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A probability vector over one player's options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Validates non-negativity and unit mass (within `1e-12`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("empty strategy"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(
                "strategy entries must be finite and non-negative",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("strategy sums to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Rescales non-negative weights to unit mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights have zero mass"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("uniform strategy over zero options"));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn pure(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::IndexOutOfRange { index, len: k });
        }
        let mut probs = vec![0.0; k];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_over(k: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("empty support"));
        }
        let mut probs = vec![0.0; k];
        let w = 1.0 / support.len() as f64;
        for &i in support {
            if i >= k {
                return Err(Error::IndexOutOfRange { index: i, len: k });
            }
            probs[i] = w;
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Lifts a strategy over a subset of options into the full option space.
    pub fn embed(&self, full_len: usize, indices: &[usize]) -> Result<Self> {
        check_len(self.len(), indices.len())?;
        let mut probs = vec![0.0; full_len];
        for (&i, &p) in indices.iter().zip(&self.probs) {
            if i >= full_len {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: full_len,
                });
            }
            probs[i] += p;
        }
        Ok(Self { probs })
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.probs
    }
}

/// Which solver produced an [`Equilibrium`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "exact-lp")]
    ExactLp,
    #[serde(rename = "exp3-approx")]
    Exp3Approx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub row_strategy: MixedStrategy,
    pub col_strategy: MixedStrategy,
    /// `pᵀ M q` of the returned pair.
    pub value: f64,
    /// Largest saddle-point violation: `max(max_i (Mq)_i - v, v - min_j (pᵀM)_j)`.
    pub residual: f64,
    pub method: Method,
}

impl Equilibrium {
    pub(crate) fn from_pair(
        m: &PayoffMatrix,
        row_strategy: MixedStrategy,
        col_strategy: MixedStrategy,
        method: Method,
    ) -> Result<Self> {
        let value = m.expected(&row_strategy, &col_strategy)?;
        let residual = saddle_residual(m, &row_strategy, &col_strategy, value)?;
        Ok(Self {
            row_strategy,
            col_strategy,
            value,
            residual,
            method,
        })
    }
}

fn saddle_residual(m: &PayoffMatrix, p: &MixedStrategy, q: &MixedStrategy, v: f64) -> Result<f64> {
    let (_, best_row) = best_response_row(m, q)?;
    let (_, best_col) = best_response_col(m, p)?;
    Ok((best_row - v).max(v - best_col).max(0.0))
}

fn argbest(values: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate().skip(1) {
        if better(x, values[best]) {
            best = i;
        }
    }
    (best, values[best])
}

/// Row maximizing `(M q)[i]`; ties go to the lowest index.
pub fn best_response_row(m: &PayoffMatrix, q: &MixedStrategy) -> Result<(usize, f64)> {
    let payoffs = m.row_payoffs(q)?;
    Ok(argbest(&payoffs, |a, b| a > b))
}

/// Column minimizing `(pᵀ M)[j]`; ties go to the lowest index.
pub fn best_response_col(m: &PayoffMatrix, p: &MixedStrategy) -> Result<(usize, f64)> {
    let payoffs = m.col_payoffs(p)?;
    Ok(argbest(&payoffs, |a, b| a < b))
}

/// Exploitabilities of a strategy pair relative to the game value `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exploitability {
    /// `v - min_j (pᵀM)[j]`, clamped at 0.
    pub row: f64,
    /// `max_i (Mq)[i] - v`, clamped at 0.
    pub col: f64,
    pub average: f64,
}

/// Exploitability of `p` as row player and `q` as column player.
///
/// Raw values below zero can only come from rounding or from a `v` that is
/// not the game value; they are clamped to zero.
pub fn exploitability(
    m: &PayoffMatrix,
    p: &MixedStrategy,
    q: &MixedStrategy,
    v: f64,
) -> Result<Exploitability> {
    let (_, min_col) = best_response_col(m, p)?;
    let (_, max_row) = best_response_row(m, q)?;
    let row = (v - min_col).max(0.0);
    let col = (max_row - v).max(0.0);
    Ok(Exploitability {
        row,
        col,
        average: 0.5 * (row + col),
    })
}
