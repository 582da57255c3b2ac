//! Flat `key = value` experiment configs.
//!
//! Lines starting with `#` are comments; a trailing `# ...` after a value is
//! also dropped, so units can be noted inline. Every key must be consumed by
//! the command, otherwise the config is rejected.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use lpcascade::Wavevector;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Default)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected 'key = value', got '{}'", no + 1, raw.trim()));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return err(format!("line {}: empty key", no + 1));
            }
            if cfg.values.insert(k.to_string(), v.to_string()).is_some() {
                return err(format!("line {}: duplicate key '{k}'", no + 1));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        for o in overrides {
            let Some((k, v)) = o.split_once('=') else {
                return err(format!("--set expects key=value, got '{o}'"));
            };
            cfg.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    pub fn str_opt(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    pub fn str_req(&self, key: &str) -> Result<String> {
        self.str_opt(key).ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse_value(key, v).map(Some),
        }
    }

    pub fn req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.opt(key)?.ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    /// Comma-separated list; an absent key gives an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) if v.is_empty() => Ok(Vec::new()),
            Some(v) => v.split(',').map(|x| parse_value(key, x.trim())).collect(),
        }
    }

    /// Wavevectors written `kx:ky` or `kx:ky:kz`, comma-separated.
    pub fn wavevectors(&self, key: &str, dim: usize) -> Result<Vec<Wavevector>> {
        let items: Vec<String> = self.list(key)?;
        items
            .iter()
            .map(|s| {
                let parts: Vec<i64> = s
                    .split(':')
                    .map(|p| p.trim().parse::<i64>().map_err(|_| ConfigError(format!("{key}: bad wavevector '{s}'"))))
                    .collect::<Result<_>>()?;
                match (dim, parts.as_slice()) {
                    (2, [x, y]) => Ok(Wavevector::new2(*x, *y)),
                    (3, [x, y, z]) => Ok(Wavevector::new3(*x, *y, *z)),
                    _ => err(format!("{key}: wavevector '{s}' does not have {dim} components")),
                }
            })
            .collect()
    }

    /// `s:r` pairs, comma-separated; `r` may be `inf`.
    pub fn pairs(&self, key: &str) -> Result<Vec<(f64, f64)>> {
        let items: Vec<String> = self.list(key)?;
        items
            .iter()
            .map(|s| match s.split_once(':') {
                Some((a, b)) => Ok((parse_value(key, a.trim())?, parse_value(key, b.trim())?)),
                None => err(format!("{key}: expected s:r, got '{s}'")),
            })
            .collect()
    }

    /// Fails on keys no command consumed.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.values.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            err(format!("unknown or unused keys: {unknown:?}"))
        }
    }

    /// The consumed keys with their values, in key order.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let used = self.used.borrow();
        self.values.iter().filter(|(k, _)| used.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    let v = match v {
        "inf" | "infinity" => "inf",
        other => other,
    };
    v.parse::<T>().map_err(|_| ConfigError(format!("key '{key}': cannot parse '{v}'")))
}
