//! Optional `key=value` config file; flags override config values.

use std::collections::BTreeMap;
use std::path::Path;
use vortexgas::{io, Error, Result};

const ALLOWED_KEYS: &[&str] = &[
    "kind",
    "n",
    "law",
    "window",
    "seed",
    "out",
    "kernel",
    "max_attempts",
    "input",
    "h",
    "steps",
    "record_every",
    "kmax",
    "cutoff",
    "col",
    "bins",
    "lo",
    "hi",
    "profile",
    "samples",
    "id",
];

pub type ConfigMap = BTreeMap<String, String>;

pub fn load(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path)?;
    let pairs = io::manifest_from_str(&text)?;
    let mut map = BTreeMap::new();
    for (k, v) in pairs {
        if !ALLOWED_KEYS.contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown config key `{k}`")));
        }
        if map.insert(k.clone(), v).is_some() {
            return Err(Error::Parse(format!("duplicate config key `{k}`")));
        }
    }
    Ok(map)
}

/// Flag value if present, else config value, else `None`.
pub fn merge<T: Clone>(
    flag: Option<T>,
    cfg: Option<&ConfigMap>,
    key: &str,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.and_then(|c| c.get(key)) {
        Some(raw) => Ok(Some(parse(raw)?)),
        None => Ok(None),
    }
}

pub fn parse_u64(s: &str) -> Result<u64> {
    s.parse().map_err(|e| Error::Parse(format!("{e}")))
}

pub fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|e| Error::Parse(format!("{e}")))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|e| Error::Parse(format!("{e}")))
}

pub fn parse_string(s: &str) -> Result<String> {
    Ok(s.to_string())
}

pub fn parse_path(s: &str) -> Result<std::path::PathBuf> {
    Ok(std::path::PathBuf::from(s))
}

/// Parse `a,b` (allowing `-inf`/`inf`) into an energy window.
pub fn parse_window(s: &str) -> Result<vortexgas::vortex::EnergyWindow> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("window `{s}` is not of the form a,b")))?;
    let parse_edge = |t: &str| -> Result<f64> {
        match t.trim() {
            "-inf" => Ok(f64::NEG_INFINITY),
            "inf" | "+inf" => Ok(f64::INFINITY),
            other => other.parse().map_err(|e| Error::Parse(format!("{e}"))),
        }
    };
    vortexgas::vortex::EnergyWindow::new(parse_edge(a)?, parse_edge(b)?)
}
