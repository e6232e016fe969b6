//! Run manifests: everything needed to repeat a run, plus what it produced.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use marlow_core::degrade::DegradeSpec;
use marlow_core::{IterationTrace, QualityReport, SolverConfig};
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum RunManifest {
    Degrade(DegradeRun),
    Complete(CompleteRun),
    Bench(BenchRun),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradeRun {
    pub tool_version: String,
    pub input: PathBuf,
    pub spec: DegradeSpec,
    pub fill: f64,
    pub degraded: PathBuf,
    pub mask: PathBuf,
    pub missing_pixels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompleteRun {
    pub tool_version: String,
    pub degraded: PathBuf,
    pub mask: PathBuf,
    pub reference: Option<PathBuf>,
    pub config: SolverConfig,
    pub output: PathBuf,
    pub metrics_path: Option<PathBuf>,
    pub metrics: Option<QualityReport>,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub tool_version: String,
    pub input_dir: PathBuf,
    pub missing_rate: f64,
    pub seed: u64,
    pub max_iter: Option<usize>,
    pub threads: usize,
    pub table: PathBuf,
    pub rows: Vec<crate::bench::BenchRow>,
}

/// Absolute form of `p` without requiring it to exist.
pub fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
