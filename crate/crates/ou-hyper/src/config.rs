//! Flat key/value configuration files.
//!
//! Syntax: UTF-8 text, one `key = value` pair per line; a `[section]`
//! header prefixes the keys that follow it as `section.key`; `#` starts a
//! comment (full line or trailing); blank lines are ignored. Values are
//! kept as strings and parsed where they are consumed.
//!
//! Unknown and duplicate keys are rejected so typos fail fast instead of
//! silently running with defaults. Command-line flags always override file
//! values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{OuError, Result};

/// Every key the toolkit understands.
pub const KNOWN_KEYS: &[&str] = &[
    "quadrature.order_d1",
    "quadrature.order_d2",
    "quadrature.order_d3",
    "tolerance.integration",
    "tolerance.min_slack",
    "run.seed",
    "run.dim",
    "run.workers",
    "output.format",
    "output.path",
    "mc.paths",
    "mc.inner_order",
];

/// Parsed configuration: flattened `section.key -> value`.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        parse_config(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Applies one `key=value` override (the CLI `--set` flag). Overrides
    /// may replace file values, but the key must still be a known one.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(OuError::InvalidParam(format!(
                "unknown config key `{key}` (known keys: {})",
                KNOWN_KEYS.join(", ")
            )));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates `(key, value)` pairs in sorted key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, |s| s.parse::<f64>().ok())
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, |s| s.parse::<u64>().ok())
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, |s| s.parse::<usize>().ok())
    }

    fn parse_with<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => parse(raw).map(Some).ok_or_else(|| {
                OuError::InvalidParam(format!(
                    "config key `{key}`: cannot parse value `{raw}`"
                ))
            }),
        }
    }
}

/// Parses configuration text, rejecting syntax errors, duplicate keys, and
/// keys outside the documented set.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut values = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(OuError::InvalidParam(format!(
                    "config line {}: malformed section header `{raw}`",
                    lineno + 1
                )));
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(OuError::InvalidParam(format!(
                    "config line {}: empty section name",
                    lineno + 1
                )));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(OuError::InvalidParam(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(OuError::InvalidParam(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if !KNOWN_KEYS.contains(&full.as_str()) {
            return Err(OuError::InvalidParam(format!(
                "config line {}: unknown key `{full}` (known keys: {})",
                lineno + 1,
                KNOWN_KEYS.join(", ")
            )));
        }
        if values.insert(full.clone(), value.to_string()).is_some() {
            return Err(OuError::InvalidParam(format!(
                "config line {}: duplicate key `{full}`",
                lineno + 1
            )));
        }
    }
    Ok(Config { values })
}
