//! `--config` files and flag/file/default precedence.
//!
//! A config file is plain `key=value` lines; `#` starts a comment. Keys are
//! flag names without the leading dashes (`gamma`, `out-model`, ...);
//! underscores and dashes are interchangeable.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rto_core::{Criterion, Schedule};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches('-').replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {}: expected key=value, got {raw:?}", i + 1);
            };
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(rto_core::RtoError::Io)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text)
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    /// Flag value if given, else the config file's, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}: cannot parse {v:?}: {e}")),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// `parity` or `covariance` (the long names used in model files work too).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    Parity,
    Covariance,
}

impl FromStr for CriterionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "parity" | "statistical_parity" | "statistical-parity" => Ok(Self::Parity),
            "covariance" | "conditional_covariance" | "conditional-covariance" => Ok(Self::Covariance),
            other => Err(format!("unknown criterion {other:?} (parity|covariance)")),
        }
    }
}

impl CriterionKind {
    pub fn build(self, rho: Option<f64>, epsilon: f64) -> Result<Criterion> {
        Ok(match self {
            Self::Parity => Criterion::StatisticalParity {
                rho: rho.context("the parity criterion needs --rho or labelled data")?,
                epsilon,
            },
            Self::Covariance => Criterion::ConditionalCovariance { epsilon },
        })
    }
}

/// `fixed` (the `0.1·√(K/T)` default), `fixed:a`, `inverse-sqrt:c` or
/// `robbins-monro:c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    DefaultFixed,
    Explicit(Schedule),
}

impl FromStr for ScheduleSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "fixed" || s == "default" {
            return Ok(Self::DefaultFixed);
        }
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| format!("schedule {s:?} needs a constant, e.g. inverse-sqrt:0.1"))?;
        let c: f64 = value.parse().map_err(|_| format!("bad schedule constant {value:?}"))?;
        let schedule = match name.replace('_', "-").as_str() {
            "fixed" => Schedule::Fixed(c),
            "inverse-sqrt" => Schedule::InverseSqrt(c),
            "robbins-monro" => Schedule::RobbinsMonro(c),
            other => return Err(format!("unknown schedule {other:?}")),
        };
        Ok(Self::Explicit(schedule))
    }
}

impl ScheduleSpec {
    pub fn resolve(self, groups: usize, examples: usize, epochs: usize) -> Schedule {
        match self {
            Self::DefaultFixed => Schedule::default_fixed(groups, examples, epochs),
            Self::Explicit(s) => s,
        }
    }
}

/// Comma-separated list of floats.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?} in list")))
        .collect()
}
