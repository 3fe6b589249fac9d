//! Report structures shared by the numerical checkers and the CLI.
//!
//! Reports serialize to JSON with a stable field order (plain structs,
//! no maps), so identical runs produce byte-identical documents.

use serde::{Deserialize, Serialize};

/// One named sub-check with its worst residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        CheckRow {
            name: name.into(),
            pass: residual <= tol,
            residual,
            tol,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// A row for an exact (integer/boolean) condition.
    pub fn exact(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckRow {
            name: name.into(),
            pass,
            residual: if pass { 0.0 } else { 1.0 },
            tol: 0.0,
            detail: detail.into(),
        }
    }

    /// A row for a sub-check that could not even be evaluated (for
    /// example when a matching precondition is itself violated). The
    /// residual is pinned to `f64::MAX` so the row fails at any
    /// tolerance while staying JSON-representable.
    pub fn error(name: impl Into<String>, tol: f64, detail: impl Into<String>) -> Self {
        CheckRow {
            name: name.into(),
            pass: false,
            residual: f64::MAX,
            tol,
            detail: detail.into(),
        }
    }
}

/// A group of related sub-checks, e.g. everything one operation verifies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub rows: Vec<CheckRow>,
    /// Hypotheses that are recorded rather than verified (e.g.
    /// connectivity of level sets, completeness of momentum maps).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, rows: Vec<CheckRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        CheckReport {
            name: name.into(),
            pass,
            rows,
            assumptions: Vec::new(),
        }
    }

    pub fn with_assumptions(mut self, assumptions: Vec<String>) -> Self {
        self.assumptions = assumptions;
        self
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}
