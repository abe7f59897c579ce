//! Run configuration: JSON with complex numbers as `[re, im]`, unknown keys rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use bethe_scalar::monodromy::DEFAULT_SEP_FLOOR;
use bethe_scalar::report::Tolerances;
use bethe_scalar::{ModelParams, C64};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    IntegralOffshell,
    IntegralOnshell,
    ClosedN1,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Oracle => "oracle",
            Method::IntegralOffshell => "integral-offshell",
            Method::IntegralOnshell => "integral-onshell",
            Method::ClosedN1 => "closed-n1",
        })
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn default_floor() -> f64 {
    DEFAULT_SEP_FLOOR
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub gamma: C64,
    pub mu: Vec<C64>,
    #[serde(default = "one")]
    pub phi1: C64,
    #[serde(default = "one")]
    pub phi2: C64,
    #[serde(default = "default_floor")]
    pub sep_floor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSets {
    pub lambda_c: Vec<C64>,
    pub lambda_b: Vec<C64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub params: Option<RawParams>,
    pub n: Option<usize>,
    pub sets: Option<RawSets>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub method: Option<Method>,
    pub initial: Option<Vec<C64>>,
    pub max_iter: Option<usize>,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: Option<ModelParams>,
    pub n: Option<usize>,
    pub sets: Option<(Vec<C64>, Vec<C64>)>,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub method: Method,
    pub initial: Option<Vec<C64>>,
    pub max_iter: usize,
}

/// A configuration problem, with the path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err(path: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            ConfigError(inner.to_string())
        } else {
            ConfigError(format!("{path}: {inner}"))
        }
    })
}

pub fn load(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text)
}

impl RawConfig {
    pub fn validate(self) -> Result<RunConfig, ConfigError> {
        let params = match self.params {
            Some(p) => Some(
                ModelParams::with_sep_floor(p.gamma, p.mu, p.phi1, p.phi2, p.sep_floor).map_err(|e| err("params", e))?,
            ),
            None => None,
        };
        let mut tolerances = Tolerances::default();
        for (k, v) in &self.tolerances {
            tolerances.set(k, *v).map_err(|e| ConfigError(e.to_string().replace("invalid input: ", "")))?;
        }
        if self.trials == Some(0) {
            return Err(err("trials", "must be at least 1"));
        }
        if self.n == Some(0) {
            return Err(err("n", "must be at least 1"));
        }
        let sets = match self.sets {
            Some(s) => {
                if s.lambda_c.len() != s.lambda_b.len() {
                    return Err(err("sets", "lambda_c and lambda_b must have equal length"));
                }
                if s.lambda_c.is_empty() {
                    return Err(err("sets", "must contain at least one value per side"));
                }
                if let Some(n) = self.n {
                    if n != s.lambda_c.len() {
                        return Err(err("n", format!("{n} disagrees with the {} values in sets", s.lambda_c.len())));
                    }
                }
                Some((s.lambda_c, s.lambda_b))
            }
            None => None,
        };
        if let (Some(p), Some(n)) = (&params, self.n) {
            if n > p.len() {
                return Err(err("n", format!("{n} exceeds the lattice length {}", p.len())));
            }
        }
        if let (Some(p), Some((x, _))) = (&params, &sets) {
            if x.len() > p.len() {
                return Err(err("sets", format!("{} values exceed the lattice length {}", x.len(), p.len())));
            }
        }
        if let Some(init) = &self.initial {
            if init.is_empty() {
                return Err(err("initial", "must contain at least one value"));
            }
        }
        Ok(RunConfig {
            params,
            n: self.n,
            sets,
            seed: self.seed.unwrap_or(42),
            trials: self.trials.unwrap_or(20),
            tolerances,
            method: self.method.unwrap_or(Method::Oracle),
            initial: self.initial,
            max_iter: self.max_iter.unwrap_or(bethe_scalar::bethe::DEFAULT_MAX_ITER),
        })
    }
}
