//! TOML config files whose keys are flag names.
//!
//! Top-level keys apply to the invoked subcommand; a table named after the
//! subcommand (for example `[reconstruct]`) adds keys for that subcommand
//! only and overrides top-level ones. Command-line flags override both.

use std::path::Path;

use crate::error::{CliError, Result};

fn scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        _ => None,
    }
}

fn push(out: &mut Vec<String>, key: &str, v: &toml::Value) -> Result<()> {
    let flag = format!("--{key}");
    match v {
        toml::Value::Boolean(true) => out.push(flag),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) if items.iter().all(|i| i.is_str()) => {
            out.push(flag);
            out.extend(items.iter().filter_map(|i| i.as_str().map(String::from)));
        }
        toml::Value::Array(items) => {
            let parts = items
                .iter()
                .map(scalar)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| CliError::usage(format!("config key '{key}': arrays must hold numbers or strings")))?;
            out.push(format!("{flag}={}", parts.join(",")));
        }
        other => {
            let s = scalar(other).ok_or_else(|| CliError::usage(format!("config key '{key}' has an unsupported type")))?;
            out.push(format!("{flag}={s}"));
        }
    }
    Ok(())
}

/// Flag tokens equivalent to the config file, for `subcommand`.
pub fn tokens(path: &Path, subcommand: &str) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let table: toml::Table =
        text.parse().map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, v) in &table {
        if !v.is_table() && k != "config" {
            push(&mut out, k, v)?;
        }
    }
    if let Some(section) = table.get(subcommand).and_then(|v| v.as_table()) {
        for (k, v) in section {
            if k != "config" {
                push(&mut out, k, v)?;
            }
        }
    }
    Ok(out)
}
