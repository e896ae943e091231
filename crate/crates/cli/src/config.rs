//! Plain-text key-value experiment configs.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored. Keys are kebab-case; values are parsed by the typed
//! getters. The raw text is kept verbatim for echoing into reports, which
//! is what makes a report sufficient to re-run its experiment.

use logcorr_core::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct Config {
    pub text: String,
    entries: BTreeMap<String, (String, usize)>, // value, line number
}

impl Config {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(format!(
                    "{source}:{}: expected `key = value`, got `{raw}`",
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), (value, idx + 1)).is_some() {
                return Err(Error::parse(format!(
                    "{source}:{}: duplicate key `{key}`",
                    idx + 1
                )));
            }
        }
        Ok(Config { text: text.to_string(), entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| Error::parse(format!("missing required key `{key}`")))
    }

    pub fn get_opt(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn located<T>(&self, key: &str, r: std::result::Result<T, String>) -> Result<T> {
        r.map_err(|msg| {
            let line = self.entries.get(key).map(|(_, l)| *l).unwrap_or(0);
            Error::parse(format!("line {line}, key `{key}`: {msg}"))
        })
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let v = self.get(key)?;
        self.located(key, parse_u64(v))
    }

    pub fn get_u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get_opt(key) {
            None => Ok(default),
            Some(v) => self.located(key, parse_u64(v)),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        self.located(key, v.parse::<f64>().map_err(|e| e.to_string()))
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get_opt(key) {
            None => Ok(default),
            Some(v) => self.located(key, v.parse::<f64>().map_err(|e| e.to_string())),
        }
    }

    /// Whitespace-separated list.
    pub fn get_list(&self, key: &str) -> Result<Vec<String>> {
        Ok(self.get(key)?.split_whitespace().map(str::to_string).collect())
    }

    pub fn get_u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let items = self.get_list(key)?;
        items
            .iter()
            .map(|s| self.located(key, parse_u64(s)))
            .collect()
    }

    pub fn get_i64_list(&self, key: &str) -> Result<Vec<i64>> {
        let items = self.get_list(key)?;
        items
            .iter()
            .map(|s| self.located(key, s.parse::<i64>().map_err(|e| e.to_string())))
            .collect()
    }

    /// `start:ratio:max` or a single `N`.
    pub fn get_schedule(&self, key: &str) -> Result<logcorr_core::CheckpointSchedule> {
        let v = self.get(key)?;
        let parts: Vec<&str> = v.split(':').collect();
        match parts.len() {
            1 => {
                let n = self.located(key, parse_u64(parts[0]))?;
                Ok(logcorr_core::CheckpointSchedule::single(n))
            }
            3 => {
                let start = self.located(key, parse_u64(parts[0]))?;
                let ratio =
                    self.located(key, parts[1].parse::<f64>().map_err(|e| e.to_string()))?;
                let max = self.located(key, parse_u64(parts[2]))?;
                logcorr_core::CheckpointSchedule::new(start, ratio, max)
            }
            _ => Err(Error::parse(format!(
                "key `{key}`: schedule must be `N` or `start:ratio:max`, got `{v}`"
            ))),
        }
    }
}

/// u64 with optional scientific shorthand (1e7) and underscores.
fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    let t = s.replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    if let Ok(v) = t.parse::<f64>() {
        if v >= 0.0 && v <= u64::MAX as f64 && v.fract() == 0.0 {
            return Ok(v as u64);
        }
    }
    Err(format!("`{s}` is not a nonnegative integer"))
}
