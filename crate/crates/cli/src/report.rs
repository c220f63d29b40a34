//! The run report: one JSON object per invocation, written to stdout.
//!
//! Every command reports its name, a SHA-256 digest of the input files,
//! and wall time.  Solver commands add their optimal value and, when a
//! matrix is produced, the matrix rows together with orthogonality and
//! constraint residuals.  Infeasible outcomes still emit a report (with
//! `infeasible: true` and any separating cut) before the process exits
//! with the infeasibility status code.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::Failure;

#[derive(Serialize)]
pub struct Residuals {
    /// Distance from the orthogonal group, `max(‖XᵀX − I‖_max, |det X − 1|)`.
    pub orth: f64,
    /// How far the produced matrix is from satisfying the command's
    /// constraints (exact meaning documented per command).
    pub constraint: f64,
}

#[derive(Serialize)]
pub struct CertificateReport {
    pub alpha: f64,
    pub beta: f64,
    pub slack: f64,
}

#[derive(Serialize)]
pub struct CutReport {
    pub normal: Vec<f64>,
    pub rhs: f64,
    pub violation: f64,
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diag_alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diag_beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<CutReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub wall_ms: f64,
}

impl RunReport {
    pub fn new(command: &'static str, inputs_digest: String) -> Self {
        RunReport {
            command,
            inputs_digest,
            value: None,
            point: None,
            certificate: None,
            gap_bound: None,
            fit_before: None,
            fit_after: None,
            diag_alpha: None,
            diag_beta: None,
            oracle_calls: None,
            infeasible: None,
            margin: None,
            cut: None,
            residuals: None,
            matrix: None,
            wall_ms: 0.0,
        }
    }

    /// Print the report as a single JSON line on stdout.
    pub fn emit(&self) {
        println!(
            "{}",
            serde_json::to_string(self).expect("report serializes")
        );
    }
}

/// SHA-256 over the raw bytes of the input files, in argument order,
/// rendered as lowercase hex.
pub fn digest_inputs(paths: &[&Path]) -> Result<String, Failure> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        hasher.update(&bytes);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}
