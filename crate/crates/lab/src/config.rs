//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Every
//! command declares the keys it accepts; anything else is rejected before
//! work starts. The seed can be overridden with the `FPPLAB_SEED`
//! environment variable, which takes precedence over the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use fpp_core::capacities::DistributionSpec;
use fpp_core::exact::parse_rational;
use fpp_core::lattice::{CylinderFamily, Direction, HeightRule, Hyperrectangle};
use fpp_core::Rational;
use thiserror::Error;

pub const SEED_ENV: &str = "FPPLAB_SEED";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

/// Parsed entries in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: index + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: index + 1,
                    text: raw.to_string(),
                });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: index + 1,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            entries: pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Rejects keys that match none of `allowed`. A trailing `*` in an
    /// allowed name matches any suffix.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for key in self.entries.keys() {
            let known = allowed.iter().any(|a| match a.strip_suffix('*') {
                Some(prefix) => key.starts_with(prefix),
                None => key == a,
            });
            if !known {
                return Err(ConfigError::Unknown(key.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(key, e)))
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| item.trim().parse::<T>().map_err(|e| invalid(key, e)))
                    .collect()
            })
            .transpose()
    }

    fn rationals(&self, key: &str) -> Result<Option<Vec<Rational>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| parse_rational(item).map_err(|e| invalid(key, e)))
                    .collect()
            })
            .transpose()
    }

    /// Seed from `FPPLAB_SEED` if set, otherwise from the `seed` key.
    pub fn seed(&self, default: Option<u64>) -> Result<u64, ConfigError> {
        if let Ok(value) = std::env::var(SEED_ENV) {
            return value.trim().parse().map_err(|e| invalid(SEED_ENV, e));
        }
        match (self.parsed::<u64>("seed")?, default) {
            (Some(seed), _) => Ok(seed),
            (None, Some(seed)) => Ok(seed),
            (None, None) => Err(ConfigError::Missing("seed".into())),
        }
    }

    pub fn distribution(&self) -> Result<DistributionSpec, ConfigError> {
        self.require("dist")?.parse().map_err(|e| invalid("dist", e))
    }

    pub fn output_dir(&self) -> Result<PathBuf, ConfigError> {
        Ok(PathBuf::from(self.require("output_dir")?))
    }

    /// Canonical `key = value` text, used for run identifiers.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

/// Keys describing a cylinder family.
pub const CYLINDER_KEYS: &[&str] = &[
    "dim",
    "normal",
    "anchor",
    "frame_*",
    "lengths",
    "height_rule",
    "height_param",
];

/// Builds `n ↦ cyl(nA, h(n))` from the cylinder keys.
///
/// Defaults: normal `e_d`, anchor at the origin, unit side lengths, frame
/// the remaining coordinate axes (tilted normals need explicit frames),
/// height parameter 1.
pub fn cylinder_family(config: &Config) -> Result<CylinderFamily, ConfigError> {
    let dim: usize = config.required("dim")?;
    if dim < 2 {
        return Err(invalid("dim", "dimension must be at least 2"));
    }
    let normal = match config.list::<i64>("normal")? {
        Some(c) => Direction::new(c).map_err(|e| invalid("normal", e))?,
        None => Direction::axis(dim, dim - 1),
    };
    if normal.dim() != dim {
        return Err(invalid("normal", format!("expected {dim} components")));
    }
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let anchor = config.rationals("anchor")?.unwrap_or_else(|| vec![zero; dim]);
    let lengths = config.rationals("lengths")?.unwrap_or_else(|| vec![one; dim - 1]);
    let mut frame = Vec::with_capacity(dim - 1);
    for k in 1..dim {
        let key = format!("frame_{k}");
        match config.rationals(&key)? {
            Some(f) => frame.push(f),
            None => match normal.axis_index() {
                Some(axis) => {
                    let slot = if k - 1 < axis { k - 1 } else { k };
                    let mut f = vec![zero; dim];
                    f[slot] = one;
                    frame.push(f);
                }
                None => return Err(ConfigError::Missing(key)),
            },
        }
    }
    let base = Hyperrectangle::new(anchor, frame, lengths, &normal).map_err(|e| invalid("frame_1", e))?;
    let rule_name = config.require("height_rule")?;
    let param = match config.get("height_param") {
        Some(p) => parse_rational(p).map_err(|e| invalid("height_param", e))?,
        None => one,
    };
    let rule = HeightRule::from_name(rule_name, param)
        .ok_or_else(|| invalid("height_rule", format!("unknown rule `{rule_name}`")))?;
    CylinderFamily::new(base, normal, rule).map_err(|e| invalid("normal", e))
}

/// Short identifier for a cylinder family, stable across runs.
pub fn family_id(family: &CylinderFamily) -> String {
    let normal: Vec<String> = family.normal().components().iter().map(|c| c.to_string()).collect();
    let rule = family.rule();
    let mut id = format!(
        "d{}-v{}-{}{}",
        family.dim(),
        normal.join("."),
        rule.name(),
        fpp_core::exact::format_rational(rule.coefficient()).replace('/', "_")
    );
    let base = family.base();
    let default_lengths = base.lengths().iter().all(|l| *l == Rational::from_integer(1));
    let default_anchor = base.anchor().iter().all(|a| *a == Rational::from_integer(0));
    if !default_lengths || !default_anchor {
        let text = format!("{:?}{:?}{:?}", base.anchor(), base.frame(), base.lengths());
        id.push('-');
        id.push_str(&crate::output::short_hash(&text)[..8]);
    }
    id
}
