//! Exact solver: primal simplex on the column player's linear program.
//!
//! After shifting the matrix to `A = M - min(M) + 1` (all entries >= 1) the
//! column player's problem becomes
//!
//! ```text
//! maximize 1ᵀy  subject to  A y <= 1,  y >= 0
//! ```
//!
//! whose optimum is `1 / w` with `w` the value of `A`; `q = y w`. The dual
//! `minimize 1ᵀx  s.t.  Aᵀx >= 1` gives the row strategy the same way. The slack
//! basis is feasible, so no phase one is needed. The final basis is re-solved
//! against the original data to shed accumulated tableau error.

use super::{
    Equilibrium, Method, MixedStrategy, PayoffMatrix, EXACT_TOLERANCE, NORMALIZATION_DRIFT,
};
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
/// Degenerate pivots in a row before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

/// Solves the game exactly; both returned strategies have exploitability at
/// most `1e-8`.
///
/// The pivot rule is fixed (Dantzig, falling back to Bland on degeneracy),
/// so repeated calls on the same input return the same equilibrium.
pub fn solve_exact(m: &PayoffMatrix) -> Result<Equilibrium> {
    if m.is_constant() {
        return Equilibrium::from_pair(
            m,
            MixedStrategy::uniform(m.rows())?,
            MixedStrategy::uniform(m.cols())?,
            Method::ExactLp,
        );
    }

    let k = m.rows();
    let kp = m.cols();
    let lo = m.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = m.entries().iter().map(|x| x - lo + 1.0).collect();

    let basis = Simplex::new(&shifted, k, kp).run()?;
    let (y, x) = resolve_basis(&shifted, k, kp, &basis)?;

    let q = normalize(y, "column")?;
    let p = normalize(x, "row")?;
    let eq = Equilibrium::from_pair(m, p, q, Method::ExactLp)?;
    if eq.residual > EXACT_TOLERANCE {
        return Err(Error::Internal(format!(
            "simplex residual {:.3e} exceeds budget",
            eq.residual
        )));
    }
    Ok(eq)
}

struct Simplex {
    /// `k` constraint rows of width `kp + k + 1` (structural, slack, rhs).
    tableau: Vec<f64>,
    /// Reduced costs, width `kp + k`.
    objective: Vec<f64>,
    basis: Vec<usize>,
    k: usize,
    width: usize,
}

impl Simplex {
    fn new(a: &[f64], k: usize, kp: usize) -> Self {
        let width = kp + k + 1;
        let mut tableau = vec![0.0; k * width];
        for i in 0..k {
            let row = &mut tableau[i * width..(i + 1) * width];
            row[..kp].copy_from_slice(&a[i * kp..(i + 1) * kp]);
            row[kp + i] = 1.0;
            row[width - 1] = 1.0;
        }
        let mut objective = vec![0.0; kp + k];
        objective[..kp].iter_mut().for_each(|c| *c = -1.0);
        Self {
            tableau,
            objective,
            basis: (kp..kp + k).collect(),
            k,
            width,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.tableau[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.tableau[i * self.width + j]
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        if bland {
            return self.objective.iter().position(|&c| c < -PIVOT_EPS);
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, &c) in self.objective.iter().enumerate() {
            if c < -PIVOT_EPS && best.is_none_or(|(_, b)| c < b) {
                best = Some((j, c));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.k {
            let a = self.at(i, col);
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = self.rhs(i) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - PIVOT_EPS
                        || (ratio <= br + PIVOT_EPS && self.basis[i] < self.basis[bi])
                    {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.at(r, c);
        for x in &mut self.tableau[r * w..(r + 1) * w] {
            *x /= piv;
        }
        let prow: Vec<f64> = self.tableau[r * w..(r + 1) * w].to_vec();
        for i in 0..self.k {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for (x, p) in self.tableau[i * w..(i + 1) * w].iter_mut().zip(&prow) {
                *x -= f * p;
            }
            self.tableau[i * w + c] = 0.0;
        }
        let f = self.objective[c];
        for (x, p) in self.objective.iter_mut().zip(&prow) {
            *x -= f * p;
        }
        self.objective[c] = 0.0;
        self.basis[r] = c;
    }

    fn run(mut self) -> Result<Vec<usize>> {
        let max_pivots = 50 * (self.width + self.k) + 1000;
        let mut bland = false;
        let mut degenerate = 0usize;
        for _ in 0..max_pivots {
            let Some(col) = self.entering(bland) else {
                return Ok(self.basis);
            };
            let Some(row) = self.leaving(col) else {
                return Err(Error::Internal("column LP reported unbounded".into()));
            };
            if self.rhs(row) <= PIVOT_EPS {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::Internal("simplex pivot limit reached".into()))
    }
}

/// Recomputes primal `y` and dual `x` for the final basis from the original data.
fn resolve_basis(a: &[f64], k: usize, kp: usize, basis: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    // Column `b` of [A | I].
    let column = |b: usize, i: usize| -> f64 {
        if b < kp {
            a[i * kp + b]
        } else if b - kp == i {
            1.0
        } else {
            0.0
        }
    };
    let mut bmat = vec![0.0; k * k];
    for i in 0..k {
        for (c, &b) in basis.iter().enumerate() {
            bmat[i * k + c] = column(b, i);
        }
    }
    let mut bt = vec![0.0; k * k];
    for i in 0..k {
        for c in 0..k {
            bt[c * k + i] = bmat[i * k + c];
        }
    }
    let z = solve_dense(bmat, k, vec![1.0; k])
        .ok_or_else(|| Error::Internal("singular final basis".into()))?;
    let cost: Vec<f64> = basis
        .iter()
        .map(|&b| if b < kp { 1.0 } else { 0.0 })
        .collect();
    let x =
        solve_dense(bt, k, cost).ok_or_else(|| Error::Internal("singular final basis".into()))?;

    let mut y = vec![0.0; kp];
    for (c, &b) in basis.iter().enumerate() {
        if b < kp {
            y[b] = z[c];
        }
    }
    Ok((y, x))
}

fn normalize(mut w: Vec<f64>, axis: &str) -> Result<MixedStrategy> {
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Internal(format!("{axis} solution has no mass")));
    }
    let mut clipped = 0.0;
    for x in &mut w {
        if *x < 0.0 {
            clipped -= *x;
            *x = 0.0;
        }
    }
    if clipped / total > NORMALIZATION_DRIFT {
        return Err(Error::Internal(format!(
            "{axis} solution has negative mass {:.3e}",
            clipped / total
        )));
    }
    MixedStrategy::from_weights(w)
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` system.
fn solve_dense(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv =
            (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in r + 1..n {
            s -= a[r * n + j] * x[j];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}
