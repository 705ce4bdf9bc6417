//! Configuration assembly: TOML file -> override flags -> strict
//! deserialization. Overrides are `key=value` pairs with dotted paths into
//! nested tables; values parse as TOML literals and fall back to strings.

use crate::CliError;
use serde::de::DeserializeOwned;
use std::path::Path;
use toml::{Table, Value};

pub fn load_table(path: Option<&Path>) -> Result<Table, CliError> {
    match path {
        None => Ok(Table::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Parse the right-hand side of an override as a TOML literal (so numbers,
/// booleans, and arrays work), treating anything unparseable as a string.
pub fn parse_value(raw: &str) -> Value {
    let probe = format!("v = {raw}");
    match toml::from_str::<Table>(&probe) {
        Ok(mut t) => t.remove("v").expect("probe key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Set `table[path] = value` where path may be dotted (`measure.theta`),
/// creating intermediate tables as needed.
pub fn set_path(table: &mut Table, path: &str, value: Value) -> Result<(), CliError> {
    let mut parts = path.split('.').peekable();
    let mut current = table;
    loop {
        let key = parts
            .next()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| CliError::Config(format!("empty key segment in override '{path}'")))?;
        if parts.peek().is_none() {
            current.insert(key.to_string(), value);
            return Ok(());
        }
        let entry = current
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        current = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!(
                "override '{path}' descends into '{key}', which is not a table"
            ))
        })?;
    }
}

pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override '{spec}' is not of the form key=value"))
    })?;
    set_path(table, key.trim(), parse_value(raw.trim()))
}

/// Keys shared by every scenario, removed from the table before the
/// scenario-specific strict parse.
#[derive(Debug, Default)]
pub struct CommonKeys {
    pub seed: Option<u64>,
    pub output_path: Option<String>,
    pub scenario: Option<String>,
}

pub fn split_common(table: &mut Table) -> Result<CommonKeys, CliError> {
    let mut common = CommonKeys::default();
    if let Some(v) = table.remove("seed") {
        let s = v
            .as_integer()
            .filter(|s| *s >= 0)
            .ok_or_else(|| CliError::Config(format!("seed must be a non-negative integer, got {v}")))?;
        common.seed = Some(s as u64);
    }
    if let Some(v) = table.remove("output_path") {
        match v {
            Value::String(s) => common.output_path = Some(s),
            other => {
                return Err(CliError::Config(format!(
                    "output_path must be a string, got {other}"
                )))
            }
        }
    }
    if let Some(v) = table.remove("scenario") {
        match v {
            Value::String(s) => common.scenario = Some(s),
            other => {
                return Err(CliError::Config(format!(
                    "scenario must be a string, got {other}"
                )))
            }
        }
    }
    Ok(common)
}

/// Deserialize the remaining table into the scenario config; unknown keys
/// are rejected by the schema.
pub fn strict<T: DeserializeOwned>(table: Table) -> Result<T, CliError> {
    Value::Table(table)
        .try_into()
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}
