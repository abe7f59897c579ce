//! Functional equations of type A and type D for `S_n`, their on-shell
//! combination, the auxiliary functions `V` and `W`, and the coefficients of
//! the `n → n-1` reduction (`Θ`, `Φ`, `F`, `K`, `Ω`).
//!
//! Equations are written as
//! `M_0 S(X|Y) + Σ_i N^B_i S(X | Y, y_i → λ_0) + Σ_i N^C_i S(X, x_i → λ_0 | Y) = 0`
//! and every residual is normalized by the sum of the term magnitudes.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::ModelParams;
use crate::numeric::{ensure_nonzero, ensure_separated, CompensatedSum};
use crate::oracle::ScalarProductEvaluator;

const ONE: C64 = C64::new(1.0, 0.0);

/// Which functional equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EquationType {
    A,
    D,
}

/// `M_0`, `N^B_i` and `N^C_i` of one functional equation at fixed `λ_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficients {
    pub kind: EquationType,
    pub lambda0: C64,
    pub m0: C64,
    pub nb: Vec<C64>,
    pub nc: Vec<C64>,
}

/// A normalized residual together with the scale it was normalized by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    pub scale: f64,
}

impl Residual {
    fn from_terms(acc: &CompensatedSum) -> Self {
        let scale = acc.abs_total();
        let residual = if scale == 0.0 { 0.0 } else { acc.value().norm() / scale };
        Residual { residual, scale }
    }
}

fn check_inputs(l0: C64, x: &[C64], y: &[C64], params: &ModelParams) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("X and Y must have equal length".into()));
    }
    let floor = params.guard_floor();
    for (name, z) in [("C", x), ("B", y)] {
        for (i, &zi) in z.iter().enumerate() {
            ensure_separated(zi - l0, floor, || format!("lambda{name}_{} - lambda0", i + 1))?;
            for (j, &zj) in z.iter().enumerate().skip(i + 1) {
                ensure_separated(zi - zj, floor, || format!("lambda{name}_{} - lambda{name}_{}", i + 1, j + 1))?;
            }
        }
    }
    Ok(())
}

/// Coefficients of the type-A equation:
/// `M_0 = ∏a(λ_0-μ) [∏ a(x-λ_0)/b(x-λ_0) - ∏ a(y-λ_0)/b(y-λ_0)]`,
/// `N_i = α c/b(z_i-λ_0) ∏a(z_i-μ) ∏_{j≠i} a(z_j-z_i)/b(z_j-z_i)` with `α_B = 1`, `α_C = -1`.
pub fn coeffs_type_a(l0: C64, x: &[C64], y: &[C64], params: &ModelParams) -> Result<Coefficients> {
    check_inputs(l0, x, y, params)?;
    let (a, b) = (|z| params.a(z), |z| params.b(z));
    let ratio = |set: &[C64]| set.iter().map(|&z| a(z - l0) / b(z - l0)).product::<C64>();
    let m0 = params.prod_a(l0) * (ratio(x) - ratio(y));
    let n = |set: &[C64], i: usize, alpha: f64| -> C64 {
        let zi = set[i];
        let others: C64 = set
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &zj)| a(zj - zi) / b(zj - zi))
            .product();
        params.c() * alpha / b(zi - l0) * params.prod_a(zi) * others
    };
    Ok(Coefficients {
        kind: EquationType::A,
        lambda0: l0,
        m0,
        nb: (0..y.len()).map(|i| n(y, i, 1.0)).collect(),
        nc: (0..x.len()).map(|i| n(x, i, -1.0)).collect(),
    })
}

/// Coefficients of the type-D equation:
/// `M̃_0 = ∏b(λ_0-μ) [∏ a(λ_0-x)/b(λ_0-x) - ∏ a(λ_0-y)/b(λ_0-y)]`,
/// `Ñ_i = α c/b(λ_0-z_i) ∏b(z_i-μ) ∏_{j≠i} a(z_i-z_j)/b(z_i-z_j)`.
pub fn coeffs_type_d(l0: C64, x: &[C64], y: &[C64], params: &ModelParams) -> Result<Coefficients> {
    check_inputs(l0, x, y, params)?;
    let (a, b) = (|z| params.a(z), |z| params.b(z));
    let ratio = |set: &[C64]| set.iter().map(|&z| a(l0 - z) / b(l0 - z)).product::<C64>();
    let m0 = params.prod_b(l0) * (ratio(x) - ratio(y));
    let n = |set: &[C64], i: usize, alpha: f64| -> C64 {
        let zi = set[i];
        let others: C64 = set
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &zj)| a(zi - zj) / b(zi - zj))
            .product();
        params.c() * alpha / b(l0 - zi) * params.prod_b(zi) * others
    };
    Ok(Coefficients {
        kind: EquationType::D,
        lambda0: l0,
        m0,
        nb: (0..y.len()).map(|i| n(y, i, 1.0)).collect(),
        nc: (0..x.len()).map(|i| n(x, i, -1.0)).collect(),
    })
}

pub fn coefficients(kind: EquationType, l0: C64, x: &[C64], y: &[C64], params: &ModelParams) -> Result<Coefficients> {
    match kind {
        EquationType::A => coeffs_type_a(l0, x, y, params),
        EquationType::D => coeffs_type_d(l0, x, y, params),
    }
}

fn replaced(set: &[C64], i: usize, value: C64) -> Vec<C64> {
    let mut v = set.to_vec();
    v[i] = value;
    v
}

fn without(set: &[C64], i: usize) -> Vec<C64> {
    set.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &z)| z)
        .collect()
}

/// Evaluates the left-hand side of a functional equation with the given coefficients.
pub fn residual_with(
    co: &Coefficients,
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<Residual> {
    let l0 = co.lambda0;
    let mut acc = CompensatedSum::new();
    acc.add(co.m0 * evaluator.evaluate(x, y, params)?);
    for i in 0..y.len() {
        acc.add(co.nb[i] * evaluator.evaluate(x, &replaced(y, i, l0), params)?);
    }
    for i in 0..x.len() {
        acc.add(co.nc[i] * evaluator.evaluate(&replaced(x, i, l0), y, params)?);
    }
    Ok(Residual::from_terms(&acc))
}

/// Normalized residual of the type-A equation.
pub fn residual_type_a(
    l0: C64,
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<Residual> {
    residual_with(&coeffs_type_a(l0, x, y, params)?, x, y, params, evaluator)
}

/// Normalized residual of the type-D equation.
pub fn residual_type_d(
    l0: C64,
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<Residual> {
    residual_with(&coeffs_type_d(l0, x, y, params)?, x, y, params, evaluator)
}

/// On-shell single equation and the cancellation of the `B`-side coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnshellResidual {
    /// `K_0 S(X|Y) + Σ K_i S(X, x_i → λ_0 | Y)`, normalized.
    pub equation: Residual,
    /// `max_i |φ_1 N^B_i + φ_2 Ñ^B_i| / (|φ_1 N^B_i| + |φ_2 Ñ^B_i|)`.
    pub b_cancellation: f64,
}

/// Tolerance on the Bethe-equation residual below which roots count as on-shell.
pub const ONSHELL_ROOT_TOLERANCE: f64 = 1e-12;

/// The on-shell equation with `K_0 = φ_1 M_0 + φ_2 M̃_0`, `K_i = φ_1 N^C_i + φ_2 Ñ^C_i`.
pub fn residual_onshell(
    l0: C64,
    x: &[C64],
    roots: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<OnshellResidual> {
    let ba = crate::bethe::bethe_residual_norm(roots, params)?;
    if ba > ONSHELL_ROOT_TOLERANCE {
        return Err(Error::StaleRoots {
            residual: ba,
            tolerance: ONSHELL_ROOT_TOLERANCE,
        });
    }
    let ca = coeffs_type_a(l0, x, roots, params)?;
    let cd = coeffs_type_d(l0, x, roots, params)?;
    let (p1, p2) = (params.phi1(), params.phi2());
    let mut b_cancellation = 0.0f64;
    for i in 0..roots.len() {
        let (u, v) = (p1 * ca.nb[i], p2 * cd.nb[i]);
        let scale = u.norm() + v.norm();
        if scale > 0.0 {
            b_cancellation = b_cancellation.max((u + v).norm() / scale);
        }
    }
    let mut acc = CompensatedSum::new();
    acc.add((p1 * ca.m0 + p2 * cd.m0) * evaluator.evaluate(x, roots, params)?);
    for i in 0..x.len() {
        let k = p1 * ca.nc[i] + p2 * cd.nc[i];
        acc.add(k * evaluator.evaluate(&replaced(x, i, l0), roots, params)?);
    }
    Ok(OnshellResidual {
        equation: Residual::from_terms(&acc),
        b_cancellation,
    })
}

/// `V` or `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Auxiliary {
    V,
    W,
}

/// `V(X'|Y') = S(X' ∪ {μ_1-γ} | Y' ∪ {μ_1}) / ∏ b(x-μ_1) a(y-μ_1)` and
/// `W(X'|Y') = S(X' ∪ {μ_1} | Y' ∪ {μ_1-γ}) / ∏ a(x-μ_1) b(y-μ_1)` on the full lattice.
pub fn extract(
    kind: Auxiliary,
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<C64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("X and Y must have equal length".into()));
    }
    let mu1 = params.mu()[0];
    let g = params.gamma();
    let (xs, ys) = match kind {
        Auxiliary::V => (mu1 - g, mu1),
        Auxiliary::W => (mu1, mu1 - g),
    };
    let mut denom = ONE;
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = match kind {
            Auxiliary::V => (params.b(xi - mu1), params.a(yi - mu1)),
            Auxiliary::W => (params.a(xi - mu1), params.b(yi - mu1)),
        };
        denom *= dx * dy;
    }
    ensure_nonzero(denom, 1.0, || format!("{kind:?} denominator"))?;
    let mut xf = vec![xs];
    xf.extend_from_slice(x);
    let mut yf = vec![ys];
    yf.extend_from_slice(y);
    Ok(evaluator.evaluate(&xf, &yf, params)? / denom)
}

pub fn extract_v(x: &[C64], y: &[C64], params: &ModelParams, evaluator: &dyn ScalarProductEvaluator) -> Result<C64> {
    extract(Auxiliary::V, x, y, params, evaluator)
}

pub fn extract_w(x: &[C64], y: &[C64], params: &ModelParams, evaluator: &dyn ScalarProductEvaluator) -> Result<C64> {
    extract(Auxiliary::W, x, y, params, evaluator)
}

/// `V` or `W` presented as a scalar-product evaluator on the reduced lattice,
/// so the functional-equation residuals apply to it unchanged.
pub struct AuxiliaryEvaluator<'a> {
    pub kind: Auxiliary,
    pub full: &'a ModelParams,
    pub inner: &'a dyn ScalarProductEvaluator,
}

impl ScalarProductEvaluator for AuxiliaryEvaluator<'_> {
    fn name(&self) -> &str {
        match self.kind {
            Auxiliary::V => "V",
            Auxiliary::W => "W",
        }
    }

    fn evaluate(&self, x: &[C64], y: &[C64], _reduced: &ModelParams) -> Result<C64> {
        extract(self.kind, x, y, self.full, self.inner)
    }
}

/// Coefficients of `S_n = Σ Θ_ij/F V(X_i|Y_j) + Σ Φ_ij/F W(X_j|Y_i) = K Σ Ω_ij V(X_i|Y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step9Coefficients {
    pub theta: DMatrix<C64>,
    pub phi: DMatrix<C64>,
    pub f_denom: C64,
    pub k_factor: C64,
    pub omega: DMatrix<C64>,
}

impl Step9Coefficients {
    /// `max_ij |K Ω_ij - (Θ_ij + Φ_ji)/F| / max_ij |(Θ_ij + Φ_ji)/F|`.
    pub fn consistency_residual(&self) -> f64 {
        let n = self.theta.nrows();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let lhs = self.k_factor * self.omega[(i, j)];
                let rhs = (self.theta[(i, j)] + self.phi[(j, i)]) / self.f_denom;
                diff = diff.max((lhs - rhs).norm());
                scale = scale.max(rhs.norm());
            }
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

fn others_product(set: &[C64], i: usize, f: impl Fn(C64, C64) -> C64) -> C64 {
    set.iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &zk)| f(set[i], zk))
        .product()
}

/// `∏_{k=2}^{L} a(μ_1-μ_k) a(μ_k-μ_1)`, guarded.
fn mu_pair_product(params: &ModelParams) -> Result<C64> {
    let mu1 = params.mu()[0];
    let mut p = ONE;
    for (k, &mk) in params.mu().iter().enumerate().skip(1) {
        let f = params.a(mu1 - mk) * params.a(mk - mu1);
        ensure_nonzero(f, 1.0, || format!("a(mu_1 - mu_{0}) a(mu_{0} - mu_1)", k + 1))?;
        p *= f;
    }
    Ok(p)
}

/// `F = ∏ a(x-μ_1)/b(x-μ_1) - ∏ a(y-μ_1)/b(y-μ_1)`.
pub fn f_denominator(x: &[C64], y: &[C64], params: &ModelParams) -> C64 {
    let mu1 = params.mu()[0];
    let r = |set: &[C64]| set.iter().map(|&z| params.a(z - mu1) / params.b(z - mu1)).product::<C64>();
    r(x) - r(y)
}

/// All Step-9 coefficients. Fails with [`Error::Singular`] when `F` vanishes.
pub fn step9_coefficients(x: &[C64], y: &[C64], params: &ModelParams) -> Result<Step9Coefficients> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidInput("Step 9 needs 1 <= n and |X| = |Y|".into()));
    }
    let floor = params.guard_floor();
    let mu1 = params.mu()[0];
    for (name, set) in [("C", x), ("B", y)] {
        for (i, &z) in set.iter().enumerate() {
            ensure_separated(z - mu1, floor, || format!("lambda{name}_{} - mu_1", i + 1))?;
            for (j, &w) in set.iter().enumerate().skip(i + 1) {
                ensure_separated(z - w, floor, || format!("lambda{name}_{} - lambda{name}_{}", i + 1, j + 1))?;
            }
        }
    }
    let (a, b, c) = (|z| params.a(z), |z| params.b(z), params.c());
    let mu = params.mu();
    let pairs = mu_pair_product(params)?;
    // ∏_{k=1}^{L} a(μ_1-μ_k) a(μ_k-μ_1), including the k = 1 factor c².
    let pairs_all = pairs * c * c;

    let ratio_x: C64 = x.iter().map(|&z| a(z - mu1) / b(z - mu1)).product();
    let ratio_y: C64 = y.iter().map(|&z| a(z - mu1) / b(z - mu1)).product();
    let f_denom = ratio_x - ratio_y;
    ensure_nonzero(f_denom, ratio_x.norm().max(ratio_y.norm()), || "F".into())?;

    let cross = |u: C64, v: C64| mu.iter().map(|&mk| a(u - mk) * b(mk - v)).product::<C64>();
    let theta = DMatrix::from_fn(n, n, |i, j| {
        let (xi, yj) = (x[i], y[j]);
        c * c / (b(xi - mu1) * b(mu1 - yj)) * cross(xi, yj) / pairs_all
            * others_product(x, i, |zi, zk| a(zk - mu1) * a(zk - zi) / b(zk - zi))
            * others_product(y, j, |zj, zk| a(zk - mu1) * a(zj - zk) / b(zj - zk))
    });
    let phi = DMatrix::from_fn(n, n, |i, j| {
        let (yi, xj) = (y[i], x[j]);
        c * c / (b(yi - mu1) * b(xj - mu1)) * cross(yi, xj) / pairs_all
            * others_product(y, i, |zi, zk| a(zk - mu1) * a(zk - zi) / b(zk - zi))
            * others_product(x, j, |zj, zk| a(zk - mu1) * a(zj - zk) / b(zj - zk))
    });
    let omega = DMatrix::from_fn(n, n, |i, j| {
        let (xi, yj) = (x[i], y[j]);
        let pre = ONE / (a(xi - mu1) * b(xi - mu1) * a(yj - mu1) * b(yj - mu1));
        let first = cross(yj, xi)
            * others_product(x, i, |zi, zk| a(zi - zk) / b(zi - zk))
            * others_product(y, j, |zj, zk| a(zk - zj) / b(zk - zj));
        let second = cross(xi, yj)
            * others_product(x, i, |zi, zk| a(zk - zi) / b(zk - zi))
            * others_product(y, j, |zj, zk| a(zj - zk) / b(zj - zk));
        pre * (first - second)
    });
    let lead: C64 = x.iter().chain(y).map(|&z| a(z - mu1)).product();
    let k_factor = lead / pairs / f_denom;
    Ok(Step9Coefficients {
        theta,
        phi,
        f_denom,
        k_factor,
        omega,
    })
}

/// Reconstruction of `S_n` from `V` and `W` one level down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionResidual {
    /// `S - Σ Θ/F V - Σ Φ/F W`, normalized by the sum of term magnitudes.
    pub theta_phi: Residual,
    /// `S - K Σ Ω V`, normalized likewise.
    pub k_omega: Residual,
    /// `K Ω_ij` versus `(Θ_ij + Φ_ji)/F`.
    pub consistency: f64,
}

pub fn step9_reconstruction(
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<ReconstructionResidual> {
    let co = step9_coefficients(x, y, params)?;
    let n = x.len();
    let s = evaluator.evaluate(x, y, params)?;
    let mut tp = CompensatedSum::new();
    let mut ko = CompensatedSum::new();
    tp.add(s);
    ko.add(s);
    for i in 0..n {
        for j in 0..n {
            let v = extract_v(&without(x, i), &without(y, j), params, evaluator)?;
            let w = extract_w(&without(x, j), &without(y, i), params, evaluator)?;
            tp.add(-co.theta[(i, j)] / co.f_denom * v);
            tp.add(-co.phi[(i, j)] / co.f_denom * w);
            ko.add(-co.k_factor * co.omega[(i, j)] * v);
        }
    }
    Ok(ReconstructionResidual {
        theta_phi: Residual::from_terms(&tp),
        k_omega: Residual::from_terms(&ko),
        consistency: co.consistency_residual(),
    })
}

/// Behaviour of the Step-9 recombination while `y_1` approaches a zero of `F`.
///
/// Individual entries `(Θ_ij + Φ_ji)/F` keep their `1/F` pole; only the
/// weighted sum `Σ (Θ_ij + Φ_ji)/F · V(X_i|Y_j)` has a finite limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueLimit {
    /// Distances of `y_1` from the zero of `F`.
    pub offsets: Vec<f64>,
    /// `|F|` at each offset.
    pub f_values: Vec<f64>,
    /// `max_ij |(Θ_ij + Φ_ji)/F|` at each offset.
    pub entry_magnitudes: Vec<f64>,
    /// `|Σ (Θ_ij + Φ_ji)/F · V(X_i|Y_j)|` at each offset.
    pub sum_magnitudes: Vec<f64>,
    /// Relative change of the weighted sum between the two closest offsets.
    pub spread: f64,
}

/// Moves `y_1` onto the locus `F = 0` (solving for `coth(y_1-μ_1)` explicitly)
/// and probes the Step-9 sum at decreasing distances from it.
pub fn step9_residue_limit(
    x: &[C64],
    y: &[C64],
    params: &ModelParams,
    evaluator: &dyn ScalarProductEvaluator,
) -> Result<ResidueLimit> {
    let mu1 = params.mu()[0];
    let g = params.gamma();
    let r = |z: C64| params.a(z - mu1) / params.b(z - mu1);
    let target: C64 = x.iter().map(|&z| r(z)).product::<C64>() / y[1..].iter().map(|&z| r(z)).product::<C64>();
    // a(u)/b(u) = cosh γ + sinh γ coth u
    let coth = (target - g.cosh()) / g.sinh();
    let y_star = mu1 + (ONE / coth).atanh();
    let offsets = vec![1e-2, 1e-4, 1e-6];
    let dir = C64::from_polar(1.0, 0.7);
    let n = x.len();
    let mut out = ResidueLimit {
        offsets: offsets.clone(),
        f_values: Vec::new(),
        entry_magnitudes: Vec::new(),
        sum_magnitudes: Vec::new(),
        spread: 0.0,
    };
    let mut sums = Vec::new();
    for &e in &offsets {
        let mut yy = y.to_vec();
        yy[0] = y_star + dir * e;
        let co = step9_coefficients(x, &yy, params)?;
        let mut acc = CompensatedSum::new();
        let mut biggest = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let w = (co.theta[(i, j)] + co.phi[(j, i)]) / co.f_denom;
                biggest = biggest.max(w.norm());
                acc.add(w * extract_v(&without(x, i), &without(&yy, j), params, evaluator)?);
            }
        }
        out.f_values.push(co.f_denom.norm());
        out.entry_magnitudes.push(biggest);
        out.sum_magnitudes.push(acc.value().norm());
        sums.push(acc.value());
    }
    let (p, q) = (sums[sums.len() - 2], sums[sums.len() - 1]);
    out.spread = (p - q).norm() / q.norm();
    Ok(out)
}

/// Largest mismatch of `lim b(λ_0-z_i) M_0 = -lim b(λ_0-z_i) N_i` over both
/// equation types, both sides and every `i`, with `λ_0 = z_i ± ε` and one
/// Richardson step on the symmetric average.
pub fn pole_matching_residual(x: &[C64], y: &[C64], params: &ModelParams, offset: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    let dir = C64::from_polar(1.0, 0.4);
    for kind in [EquationType::A, EquationType::D] {
        for (side, set) in [(crate::oracle::Side::B, y), (crate::oracle::Side::C, x)] {
            for (i, &zi) in set.iter().enumerate() {
                let sample = |eps: C64| -> Result<(C64, C64)> {
                    let l0 = zi + eps;
                    let co = coefficients(kind, l0, x, y, params)?;
                    let n_i = match side {
                        crate::oracle::Side::B => co.nb[i],
                        crate::oracle::Side::C => co.nc[i],
                    };
                    let w = params.b(l0 - zi);
                    Ok((w * co.m0, -w * n_i))
                };
                let sym = |h: f64| -> Result<(C64, C64)> {
                    let (g1, h1) = sample(dir * h)?;
                    let (g2, h2) = sample(-dir * h)?;
                    Ok(((g1 + g2) / 2.0, (h1 + h2) / 2.0))
                };
                let (g_big, h_big) = sym(offset)?;
                let (g_small, h_small) = sym(offset / 2.0)?;
                let g_lim = (g_small * 4.0 - g_big) / 3.0;
                let h_lim = (h_small * 4.0 - h_big) / 3.0;
                worst = worst.max((g_lim - h_lim).norm() / h_lim.norm());
            }
        }
    }
    Ok(worst)
}
