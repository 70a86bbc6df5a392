//! Flat `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{LabError, Result};

/// Parsed key-value pairs. Keys are unique; later duplicates are an error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| LabError::Parse {
                path: source.to_string(),
                line: idx + 1,
                message: message.to_string(),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err("empty key"));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(err(&format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            source: source.to_string(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::config(format!("{}: cannot parse `{key} = {v}`", self.source))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| LabError::config(format!("{}: missing key `{key}`", self.source)))
    }
}

/// Comma-separated reals, optionally wrapped in brackets.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| LabError::config(format!("`{s}` is not a real number")))
        })
        .collect()
}
