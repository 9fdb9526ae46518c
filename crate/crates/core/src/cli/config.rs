//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{LabError, Result};

/// Keys every subcommand accepts.
pub const COMMON_KEYS: &[&str] = &["command", "seed", "plot"];

pub const SEED_ENV_VAR: &str = "BTMLAB_SEED";

/// Validated key/value settings for one subcommand. Defaults are filled in,
/// so `entries()` lists every value that shaped the run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    command: String,
    values: BTreeMap<String, String>,
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            LabError::Parse(format!("line {}: expected key = value, got `{raw}`", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().replace(' ', "")));
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_pairs(&text)
}

impl ExperimentConfig {
    /// Merge `defaults`, then `pairs` in order (later wins). Keys outside
    /// `defaults` and [`COMMON_KEYS`] are rejected. The seed falls back to
    /// `BTMLAB_SEED`, then to 1.
    pub fn build(
        command: &str,
        defaults: &[(&str, &str)],
        pairs: &[(String, String)],
    ) -> Result<Self> {
        let mut values: BTreeMap<String, String> = defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in pairs {
            if !values.contains_key(k) && !COMMON_KEYS.contains(&k.as_str()) {
                return Err(LabError::UnknownKey {
                    command: command.to_string(),
                    key: k.clone(),
                });
            }
            if k == "command" {
                if v != command {
                    return Err(LabError::param(
                        "command",
                        format!("config is for `{v}`, not `{command}`"),
                    ));
                }
                continue;
            }
            values.insert(k.clone(), v.clone());
        }
        if !values.contains_key("seed") {
            let seed = match std::env::var(SEED_ENV_VAR) {
                Ok(s) => s.trim().to_string(),
                Err(_) => "1".to_string(),
            };
            values.insert("seed".to_string(), seed);
        }
        values
            .entry("plot".to_string())
            .or_insert_with(|| "false".to_string());
        let cfg = ExperimentConfig {
            command: command.to_string(),
            values,
        };
        cfg.u64("seed")?;
        cfg.bool("plot")?;
        Ok(cfg)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// All settings except output-only switches.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values
            .iter()
            .filter(|(k, _)| k.as_str() != "plot")
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn raw(&self, key: &'static str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| LabError::param(key, "missing value"))
    }

    pub fn str(&self, key: &'static str) -> Result<&str> {
        self.raw(key)
    }

    pub fn is_set(&self, key: &'static str) -> bool {
        self.values.get(key).is_some_and(|v| !v.is_empty())
    }

    pub fn f64(&self, key: &'static str) -> Result<f64> {
        let s = self.raw(key)?;
        s.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| LabError::param(key, format!("expected a number, got `{s}`")))
    }

    pub fn u64(&self, key: &'static str) -> Result<u64> {
        parse_count(key, self.raw(key)?)
    }

    pub fn i64(&self, key: &'static str) -> Result<i64> {
        let s = self.raw(key)?;
        match s.parse::<i64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                let f: f64 = s
                    .parse()
                    .map_err(|_| LabError::param(key, format!("expected an integer, got `{s}`")))?;
                if f.fract() == 0.0 && f.abs() < 9e15 {
                    Ok(f as i64)
                } else {
                    Err(LabError::param(
                        key,
                        format!("expected an integer, got `{s}`"),
                    ))
                }
            }
        }
    }

    pub fn usize(&self, key: &'static str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn bool(&self, key: &'static str) -> Result<bool> {
        match self.raw(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            s => Err(LabError::param(
                key,
                format!("expected true or false, got `{s}`"),
            )),
        }
    }

    pub fn f64_list(&self, key: &'static str) -> Result<Vec<f64>> {
        let s = self.raw(key)?;
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|p| {
                p.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| LabError::param(key, format!("expected numbers, got `{p}`")))
            })
            .collect()
    }

    pub fn u64_list(&self, key: &'static str) -> Result<Vec<u64>> {
        let s = self.raw(key)?;
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|p| parse_count(key, p)).collect()
    }
}

/// Nonnegative integer, also written as `1e5`.
fn parse_count(key: &'static str, s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s
        .parse()
        .map_err(|_| LabError::param(key, format!("expected a nonnegative integer, got `{s}`")))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(LabError::param(
            key,
            format!("expected a nonnegative integer, got `{s}`"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &str) -> Vec<(String, String)> {
        parse_pairs(s).unwrap()
    }

    #[test]
    fn parses_comments_and_spaces() {
        let p = pairs("# header\nalpha = 3 # tail\n\nt = 25, 100\n");
        assert_eq!(
            p,
            vec![("alpha".into(), "3".into()), ("t".into(), "25,100".into())]
        );
        assert!(parse_pairs("novalue\n").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::build("kernel", &[("t", "1")], &pairs("tt = 3")).unwrap_err();
        match err {
            LabError::UnknownKey { key, command } => {
                assert_eq!((key.as_str(), command.as_str()), ("tt", "kernel"))
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn later_values_win_and_types_parse() {
        let c = ExperimentConfig::build(
            "walk",
            &[("m", "10"), ("t", "1,2"), ("x", "-3")],
            &pairs("m = 1e5\nm = 2e5\nseed = 4"),
        )
        .unwrap();
        assert_eq!(c.usize("m").unwrap(), 200_000);
        assert_eq!(c.f64_list("t").unwrap(), vec![1.0, 2.0]);
        assert_eq!(c.i64("x").unwrap(), -3);
        assert_eq!(c.u64("seed").unwrap(), 4);
        assert!(c.u64("x").is_err());
    }

    #[test]
    fn command_key_must_match() {
        assert!(ExperimentConfig::build("lclt", &[], &pairs("command = lclt")).is_ok());
        assert!(ExperimentConfig::build("lclt", &[], &pairs("command = cells")).is_err());
    }
}
