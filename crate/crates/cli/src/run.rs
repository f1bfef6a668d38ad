//! `run.json`: the resolved configuration of a run, enough to repeat it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, OrInvalid};

pub const RUN_FILE: &str = "run.json";

#[derive(Serialize, Deserialize)]
struct RunFile<T> {
    command: String,
    version: String,
    config: T,
}

pub fn save<T: Serialize>(out: &Path, command: &str, config: &T) -> Result<()> {
    let file = RunFile {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
    };
    write_json(&out.join(RUN_FILE), &serde_json::to_value(&file)?)
}

/// Reads the config of a `command` run.
pub fn load<T: DeserializeOwned>(path: &Path, command: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let file: RunFile<Value> = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if file.command != command {
        return Err(invalid(format!(
            "{} records a `{}` run, not `{command}`",
            path.display(),
            file.command
        )));
    }
    serde_json::from_value(file.config).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Absolute path of an input that must exist.
pub fn input(path: &Path) -> Result<PathBuf> {
    if !path.exists() {
        return Err(invalid(format!("{}: no such file", path.display())));
    }
    path.canonicalize().or_invalid()
}

/// Creates `dir` if needed and returns its absolute path.
pub fn output_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.canonicalize()?)
}
