//! Flat ordered key-value configuration.
//!
//! One `key = value` pair per line, `#` comments, no nesting. Keys keep
//! their file order for echoing; lookups go through a map. Unknown keys
//! are rejected against a per-experiment schema so typos fail loudly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    pub entries: Vec<(String, String)>,
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            cfg.set(key, value.trim());
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Insert or overwrite; keeps first-seen order for echoing.
    pub fn set(&mut self, key: &str, value: &str) {
        if self.map.insert(key.to_string(), value.to_string()).is_none() {
            self.entries.push((key.to_string(), value.to_string()));
        } else if let Some(entry) = self.entries.iter_mut().find(|(k, _)| k == key) {
            entry.1 = value.to_string();
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Schema(format!("missing required key `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    /// Comma-separated f64 list.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let trimmed = part.trim();
                    if trimmed.is_empty() {
                        continue;
                    }
                    out.push(
                        trimmed
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?,
                    );
                }
                Ok(Some(out))
            }
        }
    }

    /// Reject keys outside the allowed set (exact names or prefixes).
    pub fn validate_keys(&self, allowed: &[&str], prefixes: &[&str]) -> Result<()> {
        for (key, _) in &self.entries {
            let ok = allowed.contains(&key.as_str())
                || prefixes.iter().any(|p| key.starts_with(p));
            if !ok {
                return Err(Error::Schema(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    /// Serialize in entry order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let text = "# experiment\nlambda = 0.01\nmu = 2\n\nk = 2\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.get("lambda"), Some("0.01"));
        assert_eq!(cfg.require_f64("mu").unwrap(), 2.0);
        assert_eq!(cfg.render(), "lambda = 0.01\nmu = 2\nk = 2\n");
    }

    #[test]
    fn missing_key_names_itself() {
        let cfg = Config::parse("a = 1\n").unwrap();
        let err = cfg.require("lambda").unwrap_err();
        assert!(err.to_string().contains("lambda"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg = Config::parse("lambda = 0.1\nbogus = 3\n").unwrap();
        let err = cfg.validate_keys(&["lambda"], &[]).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        assert!(cfg.validate_keys(&["lambda", "bogus"], &[]).is_ok());
    }

    #[test]
    fn lists_and_overrides() {
        let mut cfg = Config::parse("m = -2, 0\n").unwrap();
        assert_eq!(cfg.get_f64_list("m").unwrap().unwrap(), vec![-2.0, 0.0]);
        cfg.set("m", "1,2,3");
        assert_eq!(
            cfg.get_f64_list("m").unwrap().unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(cfg.entries.len(), 1);
    }

    #[test]
    fn bad_line_rejected() {
        assert!(Config::parse("just words\n").is_err());
    }
}
