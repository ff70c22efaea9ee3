//! Flat `key = value` run files. Keys are the long flag names without the
//! leading dashes; `#` starts a comment.

use std::collections::BTreeMap;

pub const KEYS: &[&str] = &[
    "alpha-start",
    "alpha-stop",
    "alpha-step",
    "transmission",
    "mismatch-width",
    "fixed-delta",
    "homodyne-outcome",
    "no-phase-correction",
    "out",
    "format",
    "oracle-check",
];

pub type Config = BTreeMap<String, String>;

pub fn parse(text: &str) -> Result<Config, String> {
    let mut out = Config::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(format!("line {}: unknown key '{key}'", lineno + 1));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
    }
    Ok(out)
}

pub fn number(cfg: &Config, key: &str) -> Result<Option<f64>, String> {
    cfg.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| format!("{key}: '{v}' is not a number"))
        })
        .transpose()
}

pub fn list(cfg: &Config, key: &str) -> Result<Option<Vec<f64>>, String> {
    cfg.get(key)
        .map(|v| {
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| format!("{key}: '{s}' is not a number"))
                })
                .collect()
        })
        .transpose()
}

pub fn flag(cfg: &Config, key: &str) -> Result<bool, String> {
    match cfg.get(key).map(|s| s.to_ascii_lowercase()) {
        None => Ok(false),
        Some(v) => match v.as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(format!("{key}: '{v}' is not a boolean")),
        },
    }
}
