use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::gpp::GameEngine;
use crate::portfolio::Role;

use super::matrix::Population;
use super::online::OpponentKind;

/// Inclusive seed range written `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    pub fn new(first: u64, last: u64) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidConfig(format!(
                "empty seed range {first}..{last}"
            )));
        }
        Ok(Self { first, last })
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seeds(&self) -> Vec<u64> {
        (self.first..=self.last).collect()
    }
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("seed range {s:?} is not of the form A..B"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        SeedRange::new(a, b)
    }
}

impl TryFrom<String> for SeedRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SeedRange> for String {
    fn from(r: SeedRange) -> Self {
        r.to_string()
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

/// A stochastic agent: option settings without a fixed seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantOptions {
    pub name: String,
    pub simulations: u32,
    #[serde(default = "default_exploration")]
    pub exploration: f64,
}

fn default_exploration() -> f64 {
    std::f64::consts::SQRT_2
}

fn default_game() -> String {
    "hex5".into()
}
fn default_sims() -> u32 {
    crate::gpp::DEFAULT_SIMULATIONS
}
fn default_range() -> SeedRange {
    SeedRange { first: 1, last: 32 }
}
fn one() -> u32 {
    1
}
fn default_k_grid() -> Vec<usize> {
    vec![4, 8, 16, 24]
}
fn default_replications() -> usize {
    100
}
fn default_online_replications() -> usize {
    1000
}
fn default_online_iterations() -> u64 {
    1 << 14
}
fn default_opponent() -> String {
    "uniform".into()
}
fn default_role() -> Role {
    Role::Black
}
fn default_mc_games() -> usize {
    10_000
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Everything an experiment run depends on. Serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_game")]
    pub game: String,
    #[serde(default = "default_sims")]
    pub simulations: u32,
    #[serde(default = "default_range")]
    pub seeds_black: SeedRange,
    #[serde(default = "default_range")]
    pub seeds_white: SeedRange,
    /// Games per matrix cell; forced to 1 for seeded (deterministic) agents.
    #[serde(default = "one")]
    pub repeats: u32,
    /// When present, rows and columns are these stochastic variants instead
    /// of seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<VariantOptions>>,
    /// Precomputed matrix; when set no games are played.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_online_replications")]
    pub online_replications: usize,
    #[serde(default = "default_online_iterations")]
    pub online_iterations: u64,
    #[serde(default = "default_opponent")]
    pub opponent: String,
    #[serde(default = "default_role")]
    pub online_role: Role,
    #[serde(default = "default_mc_games")]
    pub monte_carlo_games: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        // Relative matrix paths are resolved against the config's directory.
        if let (Some(m), Some(dir)) = (cfg.matrix.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.engine()?;
        self.opponent_kind()?;
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be >= 1".into()));
        }
        if self.simulations == 0 {
            return Err(Error::InvalidConfig("simulations must be >= 1".into()));
        }
        if self.replications == 0 || self.online_replications == 0 {
            return Err(Error::InvalidConfig(
                "replication counts must be >= 1".into(),
            ));
        }
        if self.online_iterations == 0 {
            return Err(Error::InvalidConfig(
                "online_iterations must be >= 1".into(),
            ));
        }
        if let Some(v) = &self.variants {
            if v.is_empty() {
                return Err(Error::InvalidConfig("variants list is empty".into()));
            }
        }
        let (nb, nw) = if self.matrix.is_some() {
            (usize::MAX, usize::MAX)
        } else {
            (self.black_population().len(), self.white_population().len())
        };
        if let Some(&k) = self.k_grid.iter().find(|&&k| k == 0 || k >= nb.min(nw)) {
            return Err(Error::InvalidConfig(format!(
                "learning-set size {k} must be in 1..{}",
                nb.min(nw)
            )));
        }
        Ok(())
    }

    pub fn engine(&self) -> Result<GameEngine> {
        self.game.parse()
    }

    pub fn opponent_kind(&self) -> Result<OpponentKind> {
        self.opponent.parse()
    }

    pub fn black_population(&self) -> Population {
        self.population(self.seeds_black)
    }

    pub fn white_population(&self) -> Population {
        self.population(self.seeds_white)
    }

    fn population(&self, seeds: SeedRange) -> Population {
        match &self.variants {
            Some(v) => Population::Variants(v.clone()),
            None => Population::Seeds {
                seeds: seeds.seeds(),
                simulations: self.simulations,
            },
        }
    }

    /// Canonical JSON of the config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_range_parsing() {
        let r: SeedRange = "1..16".parse().unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!(r.seeds()[0], 1);
        assert_eq!(r.to_string(), "1..16");
        assert!("16..1".parse::<SeedRange>().is_err());
        assert!("abc".parse::<SeedRange>().is_err());
        assert_eq!("3..=5".parse::<SeedRange>().unwrap().len(), 3);
    }

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.seeds_black.len(), 32);
        assert_eq!(c.online_iterations, 16384);
        assert_eq!(c.replications, 100);
        assert_eq!(c.online_replications, 1000);
    }

    #[test]
    fn rejects_bad_configs() {
        let c = ExperimentConfig {
            k_grid: vec![32],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            repeats: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            game: "go9".into(),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn digest_changes_with_seed() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.master_seed = 1;
        assert_ne!(a.digest(), b.digest());
    }
}
