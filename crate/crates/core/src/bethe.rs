//! Bethe ansatz equations in logarithmic form and a damped Newton solver.
//!
//! For each root the residual is
//!
//! ```text
//! Σ_j [log a(λ_i-μ_j) - log b(λ_i-μ_j)] - log((-1)^{n-1} φ_2/φ_1)
//!   - Σ_{k≠i} [log a(λ_i-λ_k) - log a(λ_k-λ_i)]
//! ```
//!
//! with the imaginary part folded into `(-π, π]`. Principal logarithms are
//! used term by term; folding removes the dependence on that choice.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::ModelParams;
use crate::numeric::{ensure_separated, fold_principal};

/// Default convergence tolerance on the max-norm of the log residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 20;

/// Spectral points at which the eigenvector certificate is evaluated.
const PROBES: [C64; 3] = [C64::new(0.37, 0.21), C64::new(-0.52, 0.44), C64::new(0.13, -0.61)];

fn coth(z: C64) -> C64 {
    z.cosh() / z.sinh()
}

fn twist_log(n: usize, params: &ModelParams) -> Result<C64> {
    if params.phi2() == C64::new(0.0, 0.0) {
        return Err(Error::InvalidInput("Bethe equations need phi2 != 0".into()));
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok((params.phi2() / params.phi1() * sign).ln())
}

fn check_roots(roots: &[C64], params: &ModelParams) -> Result<()> {
    let floor = params.guard_floor();
    let g = params.gamma();
    for (i, &r) in roots.iter().enumerate() {
        for (j, &m) in params.mu().iter().enumerate() {
            ensure_separated(r - m, floor, || format!("root_{} - mu_{}", i + 1, j + 1))?;
            ensure_separated(r - m + g, floor, || format!("root_{} - mu_{} + gamma", i + 1, j + 1))?;
        }
        for (k, &s) in roots.iter().enumerate().skip(i + 1) {
            ensure_separated(r - s, floor, || format!("root_{} - root_{}", i + 1, k + 1))?;
            ensure_separated(r - s + g, floor, || format!("root_{} - root_{} + gamma", i + 1, k + 1))?;
            ensure_separated(s - r + g, floor, || format!("root_{} - root_{} + gamma", k + 1, i + 1))?;
        }
    }
    Ok(())
}

/// Folded log-form residuals, one per root.
pub fn bethe_residuals(roots: &[C64], params: &ModelParams) -> Result<Vec<C64>> {
    check_roots(roots, params)?;
    let tw = twist_log(roots.len(), params)?;
    Ok(unchecked_residuals(roots, params, tw))
}

fn unchecked_residuals(roots: &[C64], params: &ModelParams, tw: C64) -> Vec<C64> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut s: C64 = params
                .mu()
                .iter()
                .map(|&m| params.a(r - m).ln() - params.b(r - m).ln())
                .sum();
            s -= tw;
            for (k, &t) in roots.iter().enumerate() {
                if k != i {
                    s -= params.a(r - t).ln() - params.a(t - r).ln();
                }
            }
            fold_principal(s)
        })
        .collect()
}

/// `max_i |r_i|`.
pub fn bethe_residual_norm(roots: &[C64], params: &ModelParams) -> Result<f64> {
    Ok(bethe_residuals(roots, params)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `∂r_i/∂λ_k` of the log residuals.
pub fn bethe_jacobian(roots: &[C64], params: &ModelParams) -> DMatrix<C64> {
    let n = roots.len();
    let g = params.gamma();
    DMatrix::from_fn(n, n, |i, k| {
        let ri = roots[i];
        if i == k {
            let mut d: C64 = params
                .mu()
                .iter()
                .map(|&m| coth(ri - m + g) - coth(ri - m))
                .sum();
            for (j, &rj) in roots.iter().enumerate() {
                if j != i {
                    d -= coth(ri - rj + g) + coth(rj - ri + g);
                }
            }
            d
        } else {
            let rk = roots[k];
            coth(ri - rk + g) + coth(rk - ri + g)
        }
    })
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    SingularJacobian,
    /// No step length among the halvings reduced the residual.
    Stalled,
}

/// Result of a Bethe solve, with certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheRootSet {
    pub roots: Vec<C64>,
    /// Max-norm of the folded log residuals at `roots`.
    pub residual: f64,
    pub converged: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Identifies the model and `n` the roots were solved for.
    pub params_fingerprint: u64,
    /// Eigenvector residual of `B(roots)|0>` at a few probe points; `None`
    /// if every probe collided with a root.
    pub eigen_certificate: Option<f64>,
}

impl BetheRootSet {
    pub fn matches(&self, params: &ModelParams) -> bool {
        self.params_fingerprint == fingerprint(params, self.roots.len())
    }
}

/// Hash of the bit patterns of the model parameters and `n`.
pub fn fingerprint(params: &ModelParams, n: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: f64| {
        for b in x.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    let mut zs = vec![params.gamma(), params.phi1(), params.phi2()];
    zs.extend_from_slice(params.mu());
    for z in zs {
        feed(z.re);
        feed(z.im);
    }
    feed(n as f64);
    h
}

/// Largest eigenvector residual over the probe points that are not poles.
pub fn eigen_certificate(roots: &[C64], params: &ModelParams) -> Option<f64> {
    PROBES
        .iter()
        .filter_map(|&l| crate::oracle::eigenvector_residual(l, roots, params).ok())
        .reduce(f64::max)
}

/// Damped Newton iteration from `initial`.
///
/// Each step tries the full Newton update and halves it (up to 20 times)
/// until the residual decreases. Returns the best iterate even when it did
/// not converge.
pub fn solve_bethe(n: usize, params: &ModelParams, initial: &[C64], max_iter: usize, tol: f64) -> Result<BetheRootSet> {
    if initial.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} initial roots, got {}",
            initial.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one root".into()));
    }
    let tw = twist_log(n, params)?;
    check_roots(initial, params)?;
    let mut roots = initial.to_vec();
    let mut res = unchecked_residuals(&roots, params, tw);
    let mut norm = max_norm(&res);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    if norm <= tol {
        status = SolveStatus::Converged;
    }
    while status != SolveStatus::Converged && iterations < max_iter {
        iterations += 1;
        let jac = bethe_jacobian(&roots, params);
        let rhs = -DVector::from_column_slice(&res);
        let Some(step) = jac.lu().solve(&rhs).filter(|s| finite(s.as_slice())) else {
            status = SolveStatus::SingularJacobian;
            break;
        };
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<C64> = roots.iter().zip(step.iter()).map(|(r, d)| r + d * scale).collect();
            if check_roots(&trial, params).is_ok() {
                let tr = unchecked_residuals(&trial, params, tw);
                let tn = max_norm(&tr);
                if tn.is_finite() && tn < norm {
                    roots = trial;
                    res = tr;
                    norm = tn;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            status = SolveStatus::Stalled;
            break;
        }
        if norm <= tol {
            status = SolveStatus::Converged;
        }
    }
    let converged = status == SolveStatus::Converged;
    Ok(BetheRootSet {
        eigen_certificate: eigen_certificate(&roots, params),
        roots,
        residual: norm,
        converged,
        status,
        iterations,
        params_fingerprint: fingerprint(params, n),
    })
}
