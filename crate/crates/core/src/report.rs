//! Verification reports and tolerance tables.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance for every named check family.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("yang-baxter", 1e-12),
    ("unitarity", 1e-12),
    ("rtt", 1e-12),
    ("vacuum", 1e-12),
    ("dual-construction", 1e-13),
    ("magnon-blocks", 0.0),
    ("commutation", 1e-12),
    ("transfer-commute", 1e-12),
    ("polynomial", 1e-8),
    ("special-zeroes", 1e-10),
    ("symmetry", 1e-13),
    ("asymptotics", 1e-5),
    ("asymptotic-decay", 1.5),
    ("funceq", 1e-9),
    ("step9-reconstruction", 1e-9),
    ("step9-consistency", 1e-12),
    ("v-equals-w", 1e-10),
    ("pole-matching", 1e-10),
    ("residue-limit", 1e-3),
    ("integral-offshell", 1e-8),
    ("h-recursive", 1e-10),
    ("non-injective", 1e-8),
    ("closed-n1", 1e-12),
    ("single-residue", 1e-13),
    ("bethe-residual", 1e-12),
    ("eigen-certificate", 1e-9),
    ("onshell-cancellation", 1e-11),
    ("onshell-equation", 1e-9),
    ("integral-onshell", 1e-7),
    ("h-stepwise", 1e-11),
];

/// Named tolerances, starting from [`DEFAULT_TOLERANCES`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    /// Overrides one entry; unknown names and negative values are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerances.{name}: must be a finite nonnegative number")));
        }
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!("tolerances.{name}: unknown tolerance"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// One checked identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    /// Name of the identity being checked.
    pub anchor: String,
    pub residual: f64,
    /// Magnitude the residual was normalized by (1 when already relative).
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    /// Passes iff `residual <= tolerance` (NaN fails).
    pub fn new(id: impl Into<String>, anchor: &str, residual: f64, scale: f64, tolerance: f64) -> Self {
        CheckRecord {
            id: id.into(),
            anchor: anchor.to_string(),
            residual,
            scale,
            tolerance,
            pass: residual <= tolerance,
            detail: None,
        }
    }

    /// A check that could not be carried out.
    pub fn failed(id: impl Into<String>, anchor: &str, detail: String) -> Self {
        CheckRecord {
            id: id.into(),
            anchor: anchor.to_string(),
            residual: f64::INFINITY,
            scale: 1.0,
            tolerance: 0.0,
            pass: false,
            detail: Some(detail),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub precision: &'static str,
    pub seed: u64,
    pub trials: usize,
    /// 0 means the global thread pool.
    pub threads: usize,
    pub negative_control: bool,
}

/// Mean and spread of `integral / oracle` over a suite's draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedConstant {
    pub mean: C64,
    /// `max |ratio - mean| / |mean|`.
    pub spread: f64,
    pub draws: usize,
}

impl FittedConstant {
    pub fn from_ratios(ratios: &[C64]) -> Option<Self> {
        if ratios.is_empty() {
            return None;
        }
        let mean = ratios.iter().sum::<C64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm();
        Some(FittedConstant {
            mean,
            spread,
            draws: ratios.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub environment: Environment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<FittedConstant>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, checks: Vec<CheckRecord>, environment: Environment) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        VerificationReport {
            suite: suite.to_string(),
            checks,
            environment,
            fitted_constant: None,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Largest residual among checks whose id starts with `prefix`.
    pub fn worst(&self, prefix: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.id.starts_with(prefix))
            .map(|c| c.residual)
            .reduce(f64::max)
    }

    /// Smallest residual among checks whose id starts with `prefix`.
    pub fn best(&self, prefix: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.id.starts_with(prefix))
            .map(|c| c.residual)
            .reduce(f64::min)
    }
}
