//! Offline portfolio policies built from a payoff matrix.
//!
//! Rows are Black's options, columns White's; entries are Black's win rate,
//! so White's preferences run along smallest column payoffs.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_game::io::{labelled, matrix_digest};
use crate::matrix_game::{
    exploitability, solve_exact, Equilibrium, Method, MixedStrategy, PayoffMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Nash,
    BestArm,
    BestHalf,
    Uniform,
    Exploiter,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Nash => "nash",
            PolicyKind::BestArm => "best-arm",
            PolicyKind::BestHalf => "best-half",
            PolicyKind::Uniform => "uniform",
            PolicyKind::Exploiter => "exploiter",
        }
    }
}

/// Black moves first and owns the rows of the payoff matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Black,
    White,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Black => Role::White,
            Role::White => Role::Black,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Black => "black",
            Role::White => "white",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "black" | "row" => Ok(Role::Black),
            "white" | "col" => Ok(Role::White),
            _ => Err(Error::invalid(format!("unknown role {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioPolicy {
    pub kind: PolicyKind,
    pub black_strategy: MixedStrategy,
    pub white_strategy: MixedStrategy,
    pub black_labels: Vec<String>,
    pub white_labels: Vec<String>,
    /// Digest of the matrix the policy was built from, if any.
    pub source_matrix_digest: Option<String>,
    pub metadata: IndexMap<String, String>,
}

impl PortfolioPolicy {
    fn from_matrix(
        kind: PolicyKind,
        m: &PayoffMatrix,
        black: MixedStrategy,
        white: MixedStrategy,
    ) -> Self {
        Self {
            kind,
            black_strategy: black,
            white_strategy: white,
            black_labels: m.row_labels().to_vec(),
            white_labels: m.col_labels().to_vec(),
            source_matrix_digest: Some(matrix_digest(m)),
            metadata: IndexMap::new(),
        }
    }

    pub fn strategy(&self, role: Role) -> &MixedStrategy {
        match role {
            Role::Black => &self.black_strategy,
            Role::White => &self.white_strategy,
        }
    }

    pub fn to_doc(&self) -> PolicyDoc {
        PolicyDoc {
            kind: self.kind,
            black: labelled(&self.black_strategy, &self.black_labels),
            white: labelled(&self.white_strategy, &self.white_labels),
            source_matrix_digest: self.source_matrix_digest.clone(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_doc(doc: &PolicyDoc) -> Result<Self> {
        Ok(Self {
            kind: doc.kind,
            black_strategy: MixedStrategy::new(doc.black.values().copied().collect())?,
            white_strategy: MixedStrategy::new(doc.white.values().copied().collect())?,
            black_labels: doc.black.keys().cloned().collect(),
            white_labels: doc.white.keys().cloned().collect(),
            source_matrix_digest: doc.source_matrix_digest.clone(),
            metadata: doc.metadata.clone(),
        })
    }
}

/// JSON layout of a policy file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDoc {
    pub kind: PolicyKind,
    pub black: IndexMap<String, f64>,
    pub white: IndexMap<String, f64>,
    pub source_matrix_digest: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub metadata: IndexMap<String, String>,
}

/// Plays the equilibrium strategies of `m` in each role.
pub fn build_nash(m: &PayoffMatrix) -> Result<PortfolioPolicy> {
    Ok(nash_from_equilibrium(m, &solve_exact(m)?))
}

/// The Nash policy of an already computed equilibrium, exact or approximate.
pub fn nash_from_equilibrium(m: &PayoffMatrix, eq: &Equilibrium) -> PortfolioPolicy {
    let mut policy = PortfolioPolicy::from_matrix(
        PolicyKind::Nash,
        m,
        eq.row_strategy.clone(),
        eq.col_strategy.clone(),
    );
    policy
        .metadata
        .insert("value".into(), format!("{}", eq.value));
    policy.metadata.insert(
        "black_support".into(),
        policy.black_strategy.support().len().to_string(),
    );
    policy.metadata.insert(
        "white_support".into(),
        policy.white_strategy.support().len().to_string(),
    );
    policy
}

/// Worst-case loss of a policy against a best-responding opponent, relative
/// to the game value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyExploitability {
    pub black: f64,
    pub white: f64,
    pub average: f64,
}

/// Nash, BestArm, BestHalf and Uniform policies of one matrix, with the
/// value they were measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyBundle {
    pub method: Method,
    pub value: f64,
    pub residual: f64,
    pub matrix_digest: String,
    pub policies: IndexMap<String, PolicyDoc>,
    pub exploitability: IndexMap<String, PolicyExploitability>,
}

pub fn build_bundle(m: &PayoffMatrix, eq: &Equilibrium) -> Result<PolicyBundle> {
    let policies = [
        nash_from_equilibrium(m, eq),
        build_best_arm(m)?,
        build_best_half(m)?,
        build_uniform_for(m)?,
    ];
    let mut docs = IndexMap::new();
    let mut expl = IndexMap::new();
    for p in &policies {
        let e = exploitability(m, &p.black_strategy, &p.white_strategy, eq.value)?;
        docs.insert(p.kind.name().to_string(), p.to_doc());
        expl.insert(
            p.kind.name().to_string(),
            PolicyExploitability {
                black: e.row,
                white: e.col,
                average: e.average,
            },
        );
    }
    Ok(PolicyBundle {
        method: eq.method,
        value: eq.value,
        residual: eq.residual,
        matrix_digest: matrix_digest(m),
        policies: docs,
        exploitability: expl,
    })
}

/// Index of the first maximum (or minimum when `max` is false).
fn first_extreme(xs: &[f64], max: bool) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if (max && x > xs[best]) || (!max && x < xs[best]) {
            best = i;
        }
    }
    best
}

/// Black: the row with the largest sum. White: the column with the smallest sum.
pub fn build_best_arm(m: &PayoffMatrix) -> Result<PortfolioPolicy> {
    let i = first_extreme(&m.row_sums(), true);
    let j = first_extreme(&m.col_sums(), false);
    Ok(PortfolioPolicy::from_matrix(
        PolicyKind::BestArm,
        m,
        MixedStrategy::pure(m.rows(), i)?,
        MixedStrategy::pure(m.cols(), j)?,
    ))
}

/// Indices of the `ceil(n/2)` best options; stable on ties.
fn top_half(sums: &[f64], largest: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&a, &b| {
        let c = sums[a].total_cmp(&sums[b]);
        if largest {
            c.reverse()
        } else {
            c
        }
    });
    order.truncate(sums.len().div_ceil(2));
    order.sort_unstable();
    order
}

/// Uniform over the better half of each side's options by matrix sums.
pub fn build_best_half(m: &PayoffMatrix) -> Result<PortfolioPolicy> {
    let rows = top_half(&m.row_sums(), true);
    let cols = top_half(&m.col_sums(), false);
    Ok(PortfolioPolicy::from_matrix(
        PolicyKind::BestHalf,
        m,
        MixedStrategy::uniform_over(m.rows(), &rows)?,
        MixedStrategy::uniform_over(m.cols(), &cols)?,
    ))
}

pub fn build_uniform(k: usize, k_prime: usize) -> Result<PortfolioPolicy> {
    if k == 0 || k_prime == 0 {
        return Err(Error::invalid("uniform portfolio over zero options"));
    }
    Ok(PortfolioPolicy {
        kind: PolicyKind::Uniform,
        black_strategy: MixedStrategy::uniform(k)?,
        white_strategy: MixedStrategy::uniform(k_prime)?,
        black_labels: (0..k).map(|i| i.to_string()).collect(),
        white_labels: (0..k_prime).map(|j| j.to_string()).collect(),
        source_matrix_digest: None,
        metadata: IndexMap::new(),
    })
}

/// Uniform portfolio carrying the labels and digest of `m`.
pub fn build_uniform_for(m: &PayoffMatrix) -> Result<PortfolioPolicy> {
    Ok(PortfolioPolicy::from_matrix(
        PolicyKind::Uniform,
        m,
        MixedStrategy::uniform(m.rows())?,
        MixedStrategy::uniform(m.cols())?,
    ))
}

/// The held-out option that wins most often against a known opponent mix.
///
/// `opponent_role` names the axis the opponent's options live on; the
/// exploiter picks from the other axis. Returns the option index and the
/// exploiter's expected win rate, lowest index on ties.
pub fn build_exploiter(
    m_holdout: &PayoffMatrix,
    opponent: &MixedStrategy,
    opponent_role: Role,
) -> Result<(usize, f64)> {
    match opponent_role {
        Role::Black => {
            let payoffs = m_holdout.col_payoffs(opponent)?;
            let wins: Vec<f64> = payoffs.iter().map(|x| 1.0 - x).collect();
            let j = first_extreme(&wins, true);
            Ok((j, wins[j]))
        }
        Role::White => {
            let payoffs = m_holdout.row_payoffs(opponent)?;
            let i = first_extreme(&payoffs, true);
            Ok((i, payoffs[i]))
        }
    }
}

/// Draws one option for `role` by inverse-CDF sampling; pure in its inputs.
pub fn sample_option(policy: &PortfolioPolicy, role: Role, rng_seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_index(policy.strategy(role), &mut rng)
}

/// Inverse-CDF draw from a strategy with the given generator.
pub fn sample_index(strategy: &MixedStrategy, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in strategy.probs().iter().enumerate() {
        acc += p;
        if u < acc && p > 0.0 {
            return i;
        }
    }
    strategy.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rps() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.5, 1.0],
            vec![1.0, 0.0, 0.5],
        ])
        .unwrap()
    }

    #[test]
    fn nash_on_rps_is_uniform() {
        let p = build_nash(&rps()).unwrap();
        for s in [&p.black_strategy, &p.white_strategy] {
            for &x in s.probs() {
                assert!((x - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        assert_eq!(p.kind, PolicyKind::Nash);
        assert!(p.source_matrix_digest.is_some());
    }

    #[test]
    fn bundle_on_rps() {
        let m = rps();
        let b = build_bundle(&m, &solve_exact(&m).unwrap()).unwrap();
        assert!((b.value - 0.5).abs() < 1e-12);
        let names: Vec<&str> = b.policies.keys().map(|k| k.as_str()).collect();
        assert_eq!(names, ["nash", "best-arm", "best-half", "uniform"]);
        assert!(b.exploitability["nash"].average < 1e-12);
        assert!((b.exploitability["best-arm"].black - 0.5).abs() < 1e-12);
    }

    #[test]
    fn best_arm_sums() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let p = build_best_arm(&m).unwrap();
        assert_eq!(p.black_strategy.support(), vec![1]);
        // White scores 1 - M, so column 1 is its better option.
        assert_eq!(p.white_strategy.support(), vec![1]);

        let c = PayoffMatrix::from_rows(vec![vec![0.4; 3]; 3]).unwrap();
        let p = build_best_arm(&c).unwrap();
        assert_eq!(p.black_strategy.support(), vec![0]);
        assert_eq!(p.white_strategy.support(), vec![0]);
    }

    #[test]
    fn best_half_top_rows() {
        // row sums 3, 1, 2, 0
        let m = PayoffMatrix::from_rows(vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let p = build_best_half(&m).unwrap();
        assert_eq!(p.black_strategy.probs(), &[0.5, 0.0, 0.5, 0.0]);
        // column sums 3, 2, 1 -> two smallest: columns 1 and 2
        assert_eq!(p.white_strategy.support(), vec![1, 2]);
    }

    #[test]
    fn best_half_single_and_odd() {
        let one = PayoffMatrix::from_rows(vec![vec![0.3, 0.7]]).unwrap();
        let p = build_best_half(&one).unwrap();
        assert_eq!(p.black_strategy.probs(), &[1.0]);

        let five =
            PayoffMatrix::from_rows((0..5).map(|i| vec![i as f64 / 4.0, 0.5]).collect()).unwrap();
        let p = build_best_half(&five).unwrap();
        assert_eq!(p.black_strategy.support(), vec![2, 3, 4]);
    }

    #[test]
    fn best_half_ties_prefer_low_index() {
        let m = PayoffMatrix::from_rows(vec![vec![0.5]; 4]).unwrap();
        let p = build_best_half(&m).unwrap();
        assert_eq!(p.black_strategy.support(), vec![0, 1]);
    }

    #[test]
    fn uniform_policies() {
        let p = build_uniform(4, 1).unwrap();
        assert_eq!(p.black_strategy.probs(), &[0.25; 4]);
        assert_eq!(p.white_strategy.probs(), &[1.0]);
        assert!(build_uniform(0, 3).is_err());
    }

    #[test]
    fn exploiter_examples() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let row0 = MixedStrategy::pure(2, 0).unwrap();
        assert_eq!(build_exploiter(&m, &row0, Role::Black).unwrap(), (1, 1.0));

        let u = MixedStrategy::uniform(3).unwrap();
        assert_eq!(build_exploiter(&rps(), &u, Role::Black).unwrap(), (0, 0.5));
        assert_eq!(build_exploiter(&rps(), &u, Role::White).unwrap(), (0, 0.5));

        let bad = MixedStrategy::uniform(3).unwrap();
        assert!(build_exploiter(&m, &bad, Role::Black).is_err());
    }

    #[test]
    fn sampling_pure_and_deterministic() {
        let m = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let p = build_best_arm(&m).unwrap();
        for seed in 0..50 {
            assert_eq!(sample_option(&p, Role::Black, seed), 1);
            assert_eq!(sample_option(&p, Role::White, seed), 1);
        }
        let u = build_uniform(4, 4).unwrap();
        assert_eq!(
            sample_option(&u, Role::Black, 99),
            sample_option(&u, Role::Black, 99)
        );
    }

    #[test]
    fn sampling_uniform_frequencies() {
        let u = build_uniform(4, 4).unwrap();
        let mut counts = [0usize; 4];
        for seed in 0..4000 {
            counts[sample_option(&u, Role::Black, seed)] += 1;
        }
        // binomial sd = sqrt(4000 * 0.25 * 0.75)
        let sd = (4000.0f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn policy_doc_round_trip() {
        let p = build_nash(&rps()).unwrap();
        let json = serde_json::to_string(&p.to_doc()).unwrap();
        let back: PolicyDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(PortfolioPolicy::from_doc(&back).unwrap(), p);
    }
}
