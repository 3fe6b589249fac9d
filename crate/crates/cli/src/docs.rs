//! Report documents emitted by the CLI. Every document carries
//! `schema_version` and serializes with a stable field order, so a
//! rerun with the same configuration is byte-identical.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use morita_core::bibundle::EquivalenceReport;
use morita_core::report::CheckReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileResult {
    pub path: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrows: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateDoc {
    pub schema_version: u32,
    pub command: String,
    pub files: Vec<FileResult>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoritaConfig {
    pub left: String,
    pub right: String,
    pub bibundle: String,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSummary {
    pub left_blocks: usize,
    pub right_blocks: usize,
    pub equivalent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoritaDoc {
    pub schema_version: u32,
    pub command: String,
    pub config: MoritaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bimodule: Option<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    pub checks: Vec<String>,
    pub tol: f64,
    pub fd_step: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonDoc {
    pub schema_version: u32,
    pub command: String,
    pub config: PoissonConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergedDoc {
    pub schema_version: u32,
    pub command: String,
    pub reports: Vec<serde_json::Value>,
    pub pass: bool,
}
