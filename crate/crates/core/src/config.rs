//! Flat `key = value` configuration with section prefixes.
//!
//! ```text
//! # comment
//! sim.full_nodes = 100
//! heatmap.samples = 1000
//! ```
//!
//! Each experiment declares the keys it understands together with their
//! defaults; [`Settings`] layers a config file and command-line overrides on
//! top of those defaults and rejects anything it does not recognise.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),
}

/// Parsed `key = value` lines in file order. Later duplicates replace
/// earlier ones but keep the first position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: Vec<(String, String)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = ConfigMap::default();
        for (i, raw) in text.lines().enumerate() {
            // `#` starts a comment at the beginning of a line or after whitespace.
            let uncommented = match raw.find(" #").or_else(|| raw.find("\t#")) {
                Some(at) => &raw[..at],
                None => raw,
            };
            let line = uncommented.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = k.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Parse { line: i + 1, message: format!("bad key `{key}`") });
            }
            map.set(key, v.trim());
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries_in_order(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Splits a `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::MalformedOverride(s.to_string()))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(ConfigError::MalformedOverride(s.to_string()));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Effective settings for one experiment: declared defaults, then the config
/// file, then overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    section: String,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// `schema` lists every key this experiment reads with its default.
    /// `known` is every key any experiment reads; file entries outside
    /// `schema` but inside `known` are accepted and ignored so one file can
    /// serve several experiments.
    pub fn resolve(
        section: &str,
        schema: &[(&str, &str)],
        known: &[&str],
        file: Option<&ConfigMap>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> = schema.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(file) = file {
            for (k, v) in file.entries_in_order() {
                if values.contains_key(k) {
                    values.insert(k.to_string(), v.to_string());
                } else if !known.contains(&k) {
                    return Err(ConfigError::UnknownKey(k.to_string()));
                }
            }
        }
        for (k, v) in overrides {
            let key = Self::qualify(section, k, &values).ok_or_else(|| ConfigError::UnknownKey(k.clone()))?;
            values.insert(key, v.clone());
        }
        Ok(Settings { section: section.to_string(), values })
    }

    /// Bare keys resolve to this experiment's section first, then `sim.`.
    fn qualify(section: &str, key: &str, values: &BTreeMap<String, String>) -> Option<String> {
        if values.contains_key(key) {
            return Some(key.to_string());
        }
        [format!("{section}.{key}"), format!("sim.{key}")].into_iter().find(|k| values.contains_key(k))
    }

    pub fn section(&self) -> &str {
        &self.section
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("undeclared setting `{key}`"))
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue { key: key.to_string(), value: self.raw(key).to_string(), reason: reason.into() }
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).parse().map_err(|e: T::Err| self.invalid(key, e.to_string()))
    }

    /// `None` for an empty value.
    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let items: Result<Vec<T>, _> = self
            .raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e: T::Err| self.invalid(key, e.to_string())))
            .collect();
        let items = items?;
        if items.is_empty() {
            return Err(self.invalid(key, "empty list"));
        }
        Ok(items)
    }

    pub fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(self.invalid(key, "expected true or false")),
        }
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        let mut out = format!("experiment={}\n", self.section);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
