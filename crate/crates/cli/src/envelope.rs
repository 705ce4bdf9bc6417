//! The one-per-run output record: every run embeds its fully resolved
//! configuration, the artifact schema version, provenance tags on headline
//! numbers, and wall-clock timing. The results section is deterministic for
//! a fixed config and seed; timing lives outside it.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const ARTIFACT_VERSION: &str = "molatom.envelope/1";

/// Provenance of a headline number: calibrated against a published table,
/// computed by this artifact, or an externally measured input.
pub const PROV_PAPER_ANCHORED: &str = "paper-anchored";
pub const PROV_DERIVED: &str = "derived";
pub const PROV_EXTERNAL: &str = "external";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultEnvelope {
    pub artifact_version: String,
    pub scenario: String,
    pub seed: u64,
    /// Exact resolved configuration the run used, overrides applied.
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    /// Tags on top-level result keys: paper-anchored | derived | external.
    pub provenance: BTreeMap<String, String>,
    pub timing_seconds: f64,
}

impl ResultEnvelope {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{} is not a result envelope: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = self.to_json_pretty();
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}
