//! Layered key/value settings: config file, then `GDBOUND_SEED`, then flags.
//!
//! The config file is flat `key = value` text with `#` comments. A JSON
//! report written by an earlier run is also accepted; its embedded config is
//! replayed.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const SEED_ENV: &str = "GDBOUND_SEED";

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
}

pub const fn key(name: &'static str, help: &'static str) -> Key {
    Key { name, help }
}

/// Settings for one command, with a record of every value actually used.
#[derive(Debug)]
pub struct Settings {
    command: String,
    values: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn parse_flat(text: &str, allowed: &[Key]) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    check_known(&out, allowed)?;
    Ok(out)
}

fn check_known(values: &BTreeMap<String, String>, allowed: &[Key]) -> Result<(), CliError> {
    for k in values.keys() {
        if !allowed.iter().any(|a| a.name == k) {
            return Err(CliError::Usage(format!("unknown config key {k:?}")));
        }
    }
    Ok(())
}

fn parse_report_config(text: &str, command: &str, allowed: &[Key]) -> Result<BTreeMap<String, String>, CliError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config report is not valid JSON: {e}")))?;
    if v.get("command").and_then(|c| c.as_str()) != Some(command) {
        return Err(CliError::Usage(format!("config report was written by a different command than `{command}`")));
    }
    let map = v
        .get("config")
        .and_then(|c| c.as_object())
        .ok_or_else(|| CliError::Usage("config report has no `config` object".into()))?;
    let mut out = BTreeMap::new();
    for (k, v) in map {
        let s = v.as_str().ok_or_else(|| CliError::Usage(format!("config value for {k:?} must be a string")))?;
        out.insert(k.clone(), s.to_string());
    }
    check_known(&out, allowed)?;
    Ok(out)
}

impl Settings {
    pub fn load(
        command: &str,
        allowed: &[Key],
        config: Option<&Path>,
        env_seed: Option<String>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut values = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                if text.trim_start().starts_with('{') {
                    parse_report_config(&text, command, allowed)?
                } else {
                    parse_flat(&text, allowed)?
                }
            }
            None => BTreeMap::new(),
        };
        if let Some(seed) = env_seed {
            if allowed.iter().any(|k| k.name == "seed") {
                values.insert("seed".into(), seed);
            }
        }
        check_known(&flags, allowed)?;
        values.extend(flags);
        Ok(Self { command: command.to_string(), values, resolved: BTreeMap::new() })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Every value read so far, defaults included.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned()?;
        self.resolved.insert(key.to_string(), v.clone());
        Some(v)
    }

    fn raw_or(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    pub fn require(&mut self, key: &str) -> Result<String, CliError> {
        self.raw(key).ok_or_else(|| CliError::Usage(format!("missing required key: {key}")))
    }

    /// Errors listing every absent key.
    pub fn require_all(&self, keys: &[&str]) -> Result<(), CliError> {
        let missing: Vec<&str> = keys.iter().copied().filter(|k| !self.has(k)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("missing required keys: {}", missing.join(", "))))
        }
    }

    /// Rejects keys that are valid for the command but unused by this mode.
    pub fn only(&self, keys: &[&str]) -> Result<(), CliError> {
        let extra: Vec<&str> = self.values.keys().map(String::as_str).filter(|k| !keys.contains(k)).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("keys not used here: {}", extra.join(", "))))
        }
    }

    pub fn parse<T: FromStr>(&mut self, key: &str, default: &str) -> Result<T, CliError> {
        let v = self.raw_or(key, default);
        parse_value(key, &v)
    }

    pub fn parse_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key).map(|v| parse_value(key, &v)).transpose()
    }

    pub fn real(&mut self, key: &str, default: &str) -> Result<f64, CliError> {
        let v = self.raw_or(key, default);
        parse_real(key, &v)
    }

    pub fn real_req(&mut self, key: &str) -> Result<f64, CliError> {
        let v = self.require(key)?;
        parse_real(key, &v)
    }

    pub fn real_opt(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_real(key, &v)).transpose()
    }

    pub fn reals(&mut self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw_or(key, default);
        parse_reals(key, &v)
    }

    pub fn reals_req(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.require(key)?;
        parse_reals(key, &v)
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("invalid value {v:?} for {key}")))
}

/// Reals, plus `ln<x>` for the natural log of `x` (so `ln100` is `t = ln 100`).
pub fn parse_real(key: &str, v: &str) -> Result<f64, CliError> {
    let bad = || CliError::Usage(format!("invalid number {v:?} for {key}"));
    let x = match v.trim().strip_prefix("ln") {
        Some(rest) => rest.trim().parse::<f64>().map_err(|_| bad())?.ln(),
        None => v.trim().parse::<f64>().map_err(|_| bad())?,
    };
    if x.is_nan() {
        return Err(bad());
    }
    Ok(x)
}

pub fn parse_reals(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_real(key, s)).collect()
}
