//! `--config` support: a single JSON object whose keys mirror the long
//! flag names (snake_case). Explicit flags win over config values.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct ConfigMap(Map<String, Value>);

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        match value {
            Value::Object(map) => Ok(Self(map)),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.string(key)?.map(PathBuf::from))
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => bail!("config key {key:?} should be a string, got {other}"),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(Some(
                n.as_f64().ok_or_else(|| anyhow!("config key {key:?} out of range"))?,
            )),
            Some(other) => bail!("config key {key:?} should be a number, got {other}"),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(Some(n.as_u64().ok_or_else(|| {
                anyhow!("config key {key:?} should be a non-negative integer")
            })?)),
            Some(other) => bail!("config key {key:?} should be an integer, got {other}"),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }
}

/// Flag value, else config value, else error naming the option.
pub fn require<T>(name: &str, flag: Option<T>, fallback: Option<T>) -> Result<T> {
    flag.or(fallback)
        .ok_or_else(|| anyhow!("missing required option --{name} (also absent from --config)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"k": 5, "out": "from_config.jsonl"}"#).unwrap();
        let cfg = ConfigMap::load(Some(&path)).unwrap();
        assert_eq!(require("k", Some(9usize), cfg.usize("k").unwrap()).unwrap(), 9);
        assert_eq!(require("k", None, cfg.usize("k").unwrap()).unwrap(), 5);
        assert_eq!(
            require("out", None, cfg.path("out").unwrap()).unwrap(),
            PathBuf::from("from_config.jsonl")
        );
        assert!(require::<usize>("missing", None, None).is_err());
    }

    #[test]
    fn type_mismatches_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"k": "not a number"}"#).unwrap();
        let cfg = ConfigMap::load(Some(&path)).unwrap();
        assert!(cfg.usize("k").is_err());
        std::fs::write(&path, "[1,2]").unwrap();
        assert!(ConfigMap::load(Some(&path)).is_err());
    }
}
