//! Scenario runner for the molatom suite: configuration ingestion with
//! strict schemas and override flags, seeded deterministic execution, and a
//! self-describing JSON result envelope per run plus CSV plot exports.

pub mod envelope;
pub mod export;
pub mod overrides;
pub mod scenarios;

use thiserror::Error;

/// Failures are sorted into three exit classes: bad or invalid
/// configuration (2), numerical failure during a valid run (3), and a
/// violated physics invariant that the run was supposed to guarantee (4).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Invariant(_) => "invariant",
        }
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }
}
