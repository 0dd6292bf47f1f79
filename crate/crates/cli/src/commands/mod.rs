//! Subcommand implementations. Each leaf command declares its keys once;
//! they become `--key value` flags and the set of valid config-file keys.

use std::path::Path;

use gdbound_core::Execution;
use nalgebra::DMatrix;
use serde_json::Value;

use crate::config::{key, Key, Settings};
use crate::error::CliError;

pub mod bound;
pub mod experiment;
pub mod graph;
pub mod lfrc;
pub mod rstar;
pub mod verify;

pub struct Leaf {
    /// Path of names from the top level, e.g. `["lfrc", "estimate"]`.
    pub path: &'static [&'static str],
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&mut Settings, &Context) -> Result<Outcome, CliError>,
}

/// Extra inputs a command may need beyond its keys.
pub struct Context<'a> {
    /// Positional formula name for `bound`.
    pub formula: Option<&'a str>,
    pub output: Option<&'a Path>,
}

pub struct Outcome {
    pub text: String,
    pub seed: Option<u64>,
    pub result: Value,
    /// Set when the run completed but found violations (exit 1).
    pub failure: Option<String>,
    /// Reports written next to the main one, as (file name, JSON value).
    pub extra: Vec<(String, Value)>,
}

impl Outcome {
    pub fn new(text: String, seed: Option<u64>, result: Value) -> Self {
        Self { text, seed, result, failure: None, extra: Vec::new() }
    }
}

pub const SEED: Key = key("seed", "master RNG seed (GDBOUND_SEED overrides the config file)");
pub const EXEC: Key = key("exec", "parallel | sequential");

pub fn leaves() -> Vec<Leaf> {
    vec![
        verify::LEAF,
        bound::LEAF,
        lfrc::ESTIMATE,
        lfrc::FIXED_POINT,
        rstar::KERNEL,
        rstar::LINEAR,
        experiment::LEAF,
        graph::CHI,
        graph::COVER_CHECK,
    ]
}

pub fn exec(s: &mut Settings) -> Result<Execution, CliError> {
    match s.parse::<String>("exec", "parallel")?.as_str() {
        "parallel" => Ok(Execution::Parallel),
        "sequential" => Ok(Execution::Sequential),
        other => Err(CliError::Usage(format!("exec must be parallel or sequential, got {other:?}"))),
    }
}

pub fn seed(s: &mut Settings) -> Result<u64, CliError> {
    s.parse("seed", "0")
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Io(format!("cannot serialize result: {e}")))
}

/// Whitespace-separated rows of reals; `#` starts a comment line.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Dataset(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Dataset(format!("{} line {}: expected numbers", path.display(), i + 1)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::Dataset(format!("{} line {}: ragged row", path.display(), i + 1)));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}
