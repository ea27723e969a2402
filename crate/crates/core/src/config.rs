//! Flat `key = value` parameter files.
//!
//! Blank lines and `#` comments are ignored. Consumers take the keys they
//! understand; [`KvMap::finish`] rejects whatever is left over so typos in
//! parameter files surface as errors.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { key: String, line: usize },
    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("unknown key(s): {0}")]
    Unknown(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    key: k.to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn take<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError> {
        if let Some(v) = self.entries.remove(key) {
            *slot = v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v,
            })?;
        }
        Ok(())
    }

    pub fn take_f64(&mut self, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        self.take(key, slot)?;
        if !slot.is_finite() {
            return Err(ConfigError::BadValue {
                key: key.to_string(),
                value: slot.to_string(),
            });
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn finish(self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<_> = self.entries.into_keys().collect();
            Err(ConfigError::Unknown(keys.join(", ")))
        }
    }
}
