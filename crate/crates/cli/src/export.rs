//! CSV plot-data export from result envelopes. Each kind pulls one named
//! series out of the results section; the header row names columns with
//! units and numeric values carry 12 significant digits.

use crate::envelope::ResultEnvelope;
use crate::CliError;
use serde_json::Value;
use std::path::Path;

pub const EXPORT_KINDS: [&str; 3] = ["phase-vs-ratio", "gap-scan", "outcome-histogram"];

/// 12 significant digits, scientific notation.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn series<'a>(
    env: &'a ResultEnvelope,
    key: &str,
    hint: &str,
) -> Result<&'a Vec<Value>, CliError> {
    env.results
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| {
            CliError::Config(format!(
                "envelope from scenario '{}' has no '{key}' series; {hint}",
                env.scenario
            ))
        })
}

fn f64_field(row: &Value, key: &str) -> Result<f64, CliError> {
    row.get(key).and_then(Value::as_f64).ok_or_else(|| {
        CliError::Config(format!("series row is missing numeric field '{key}'"))
    })
}

fn u64_field(row: &Value, key: &str) -> Result<u64, CliError> {
    row.get(key).and_then(Value::as_u64).ok_or_else(|| {
        CliError::Config(format!("series row is missing integer field '{key}'"))
    })
}

/// Write the requested series as CSV; returns the number of data rows.
pub fn export_csv(env: &ResultEnvelope, kind: &str, out: &Path) -> Result<usize, CliError> {
    let mut lines: Vec<String> = Vec::new();
    match kind {
        "phase-vs-ratio" => {
            let rows = series(env, "sweep", "run gate-sim with sweep_ratios set")?;
            lines.push(
                "omega_ratio (dimensionless),conditional_phase (rad),\
                 phase_error_vs_pi (rad),leakage (probability),\
                 fidelity_vs_ideal (probability)"
                    .into(),
            );
            for row in rows {
                lines.push(
                    [
                        sig12(f64_field(row, "omega_ratio")?),
                        sig12(f64_field(row, "conditional_phase_rad")?),
                        sig12(f64_field(row, "phase_error_vs_pi_rad")?),
                        sig12(f64_field(row, "leakage")?),
                        sig12(f64_field(row, "fidelity_vs_ideal")?),
                    ]
                    .join(","),
                );
            }
        }
        "gap-scan" => {
            let rows = series(env, "gap_scan", "run criticality with a [scan] block")?;
            lines.push(
                "n_sites (count),J_over_h (dimensionless),gap (units of h),\
                 energy_per_site (units of h)"
                    .into(),
            );
            for row in rows {
                lines.push(
                    [
                        u64_field(row, "n_sites")?.to_string(),
                        sig12(f64_field(row, "j_over_h")?),
                        sig12(f64_field(row, "gap")?),
                        sig12(f64_field(row, "energy_per_site")?),
                    ]
                    .join(","),
                );
            }
        }
        "outcome-histogram" => {
            let rows = series(env, "outcome_histogram", "run the ghz scenario")?;
            lines.push("outcome (level),frequency (probability)".into());
            let mut total = 0.0;
            for row in rows {
                let f = f64_field(row, "frequency")?;
                total += f;
                lines.push([u64_field(row, "outcome")?.to_string(), sig12(f)].join(","));
            }
            if (total - 1.0).abs() > 1e-10 {
                return Err(CliError::Invariant(format!(
                    "histogram frequencies sum to {total}, expected 1"
                )));
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown export kind '{other}', expected one of {EXPORT_KINDS:?}"
            )))
        }
    }
    let n_rows = lines.len() - 1;
    let mut text = lines.join("\n");
    text.push('\n');
    std::fs::write(out, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", out.display())))?;
    Ok(n_rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::ARTIFACT_VERSION;
    use serde_json::json;
    use std::collections::BTreeMap;

    fn env_with(results: Value, scenario: &str) -> ResultEnvelope {
        ResultEnvelope {
            artifact_version: ARTIFACT_VERSION.into(),
            scenario: scenario.into(),
            seed: 0,
            config: json!({}),
            results,
            provenance: BTreeMap::new(),
            timing_seconds: 0.0,
        }
    }

    #[test]
    fn gap_scan_csv_has_units_and_digits() {
        let env = env_with(
            json!({"gap_scan": [
                {"n_sites": 4, "j_over_h": 1.0, "gap": 0.123456789012345, "energy_per_site": -2.0}
            ]}),
            "criticality",
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let n = export_csv(&env, "gap-scan", &path).unwrap();
        assert_eq!(n, 1);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().contains("units of h"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("4,"));
        assert!(row.contains("1.23456789012e-1"));
    }

    #[test]
    fn missing_series_is_a_config_error() {
        let env = env_with(json!({}), "budget");
        let dir = tempfile::tempdir().unwrap();
        let r = export_csv(&env, "gap-scan", &dir.path().join("x.csv"));
        assert!(matches!(r, Err(CliError::Config(_))));
        let r = export_csv(&env, "no-such-kind", &dir.path().join("x.csv"));
        assert!(matches!(r, Err(CliError::Config(_))));
    }

    #[test]
    fn histogram_normalization_is_enforced() {
        let env = env_with(
            json!({"outcome_histogram": [
                {"outcome": 0, "frequency": 0.6},
                {"outcome": 1, "frequency": 0.3}
            ]}),
            "ghz",
        );
        let dir = tempfile::tempdir().unwrap();
        let r = export_csv(&env, "outcome-histogram", &dir.path().join("h.csv"));
        assert!(matches!(r, Err(CliError::Invariant(_))));
    }
}
