//! CSV and JSON report writers plus the run manifest.
//!
//! Floats are written with [`format_entry`], JSON with two-space
//! indentation and a trailing newline, so equal inputs give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::cross_eval::CrossEvaluation;
use super::generalization::GeneralizationReport;
use super::online::OnlineReport;
use crate::digest::sha256_hex;
use crate::error::Result;
use crate::matrix_game::io::format_entry;

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| crate::error::Error::Internal(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(format_entry).unwrap_or_default()
}

pub fn generalization_csv(r: &GeneralizationReport) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.k.to_string(),
                row.policy.name().to_string(),
                format_entry(row.win_vs_uniform),
                format_entry(row.win_vs_uniform_se),
                format_entry(row.exploiter_loss),
                format_entry(row.exploiter_loss_se),
                format_entry(row.black_win_vs_uniform),
                format_entry(row.white_win_vs_uniform),
                format_entry(row.black_exploiter_loss),
                format_entry(row.white_exploiter_loss),
                row.replications.to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "k",
            "policy",
            "win_vs_uniform",
            "win_vs_uniform_se",
            "exploiter_loss",
            "exploiter_loss_se",
            "black_win_vs_uniform",
            "white_win_vs_uniform",
            "black_exploiter_loss",
            "white_exploiter_loss",
            "replications",
        ],
        &rows,
    )
}

pub fn cross_eval_csv(r: &CrossEvaluation) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .map(|e| {
            vec![
                e.id.clone(),
                e.caption.clone(),
                e.black.name().to_string(),
                e.white.name().to_string(),
                e.reported_for.name().to_string(),
                format_entry(e.analytic),
                opt(e.simulated),
                opt(e.simulated_se),
                e.simulated_games.map(|g| g.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "id",
            "caption",
            "black",
            "white",
            "reported_for",
            "analytic",
            "simulated",
            "simulated_se",
            "simulated_games",
        ],
        &rows,
    )
}

pub fn online_csv(r: &OnlineReport) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = r
        .curve
        .iter()
        .map(|p| {
            vec![
                p.iteration.to_string(),
                format_entry(p.losing_rate_mean),
                format_entry(p.losing_rate_stddev),
                p.replications.to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "iteration",
            "losing_rate_mean",
            "losing_rate_stddev",
            "replications",
        ],
        &rows,
    )
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Everything needed to rerun an invocation and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_digest: Option<String>,
    #[serde(default)]
    pub parameters: IndexMap<String, String>,
    /// Output file name to SHA-256 of its bytes.
    pub outputs: IndexMap<String, String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, master_seed: u64) -> Self {
        Self {
            tool: "seedfolio".into(),
            version: crate::VERSION.into(),
            command: command.into(),
            master_seed,
            config_digest: None,
            matrix_digest: None,
            parameters: IndexMap::new(),
            outputs: IndexMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

/// Writes report files into one directory and records their digests.
#[derive(Debug)]
pub struct ReportWriter {
    dir: PathBuf,
    pub manifest: Manifest,
    written: Vec<PathBuf>,
}

impl ReportWriter {
    pub fn create(dir: &Path, manifest: Manifest) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.manifest
            .outputs
            .insert(name.to_string(), sha256_hex(bytes));
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `manifest.json` and returns every path written.
    pub fn finish(self) -> Result<Vec<PathBuf>> {
        let mut written = self.written;
        let path = self.dir.join("manifest.json");
        fs::write(&path, json_bytes(&self.manifest)?)?;
        written.push(path);
        Ok(written)
    }
}
