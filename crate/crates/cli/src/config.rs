//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names (`-` and `_` are interchangeable); a flag on
//! the command line wins over the file. Lists are comma-separated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::anyhow;

use crate::failure::Failure;

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, (usize, String)>,
    used: BTreeSet<String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Io(anyhow!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| e.context(format!("config {}", p.display())))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Data(anyhow!("line {}: expected `key = value`", k + 1)))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(Failure::Data(anyhow!("line {}: empty key", k + 1)));
            }
            if values.insert(key.clone(), (k + 1, value.trim().to_string())).is_some() {
                return Err(Failure::Data(anyhow!("line {}: `{key}` set twice", k + 1)));
            }
        }
        Ok(Self {
            values,
            used: BTreeSet::new(),
        })
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let key = normalize(key);
        self.used.insert(key.clone());
        self.values.get(&key).cloned()
    }

    /// The flag if given, else the config entry, else `None`.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_file {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Failure::Data(anyhow!("config line {line}: bad value `{v}` for `{key}`: {e}"))),
        }
    }

    pub fn value_or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.value(key, flag)?.unwrap_or(default))
    }

    /// Comma-separated list; an empty flag vector counts as absent.
    pub fn list<T>(&mut self, key: &str, flag: Vec<T>, default: Vec<T>) -> Result<Vec<T>, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match from_file {
            None => Ok(default),
            Some((line, v)) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse::<T>()
                        .map_err(|e| Failure::Data(anyhow!("config line {line}: bad item `{item}` for `{key}`: {e}")))
                })
                .collect(),
        }
    }

    /// A boolean switch: set by the flag or by `key = true`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, Failure> {
        Ok(self.value::<bool>(key, flag.then_some(true))?.unwrap_or(false))
    }

    /// Rejects config keys the command never asked for.
    pub fn finish(&self) -> Result<(), Failure> {
        let unknown: Vec<String> = self
            .values
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, (line, _))| format!("`{k}` (line {line})"))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Failure::Data(anyhow!(
                "unknown config keys for this command: {}; known: {}",
                unknown.join(", "),
                self.used.iter().cloned().collect::<Vec<_>>().join(", ")
            )))
        }
    }
}
