//! Direct evaluation of the scalar product
//! `S_n(X | Y) = <0| C(x_1)…C(x_n) B(y_1)…B(y_n) |0>` by matrix-vector chains,
//! the transfer-matrix eigenvalue, and checks of the structural lemmas
//! (polynomiality, special zeroes, symmetry, asymptotics).
//!
//! Throughout, `X = (λ^C_1..λ^C_n)` and `Y = (λ^B_1..λ^B_n)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::{apply_entry, vacuum, Entry, ModelParams, StateVector};
use crate::numeric::{ensure_separated, lagrange_weights, rel_diff};
use crate::sampling;
use crate::weights::q_factorial;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// The two argument tuples of a scalar product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSets {
    lambda_c: Vec<C64>,
    lambda_b: Vec<C64>,
}

impl SpectralSets {
    /// Only checks that both tuples have the same length.
    pub fn new(lambda_c: Vec<C64>, lambda_b: Vec<C64>) -> Result<Self> {
        if lambda_c.len() != lambda_b.len() {
            return Err(Error::InvalidInput(format!(
                "lambdaC has {} entries but lambdaB has {}",
                lambda_c.len(),
                lambda_b.len()
            )));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !lambda_c.iter().chain(&lambda_b).all(finite) {
            return Err(Error::InvalidInput("spectral parameters must be finite".into()));
        }
        Ok(Self { lambda_c, lambda_b })
    }

    /// Builds and checks genericity against `params` in one go.
    pub fn generic(lambda_c: Vec<C64>, lambda_b: Vec<C64>, params: &ModelParams) -> Result<Self> {
        let s = Self::new(lambda_c, lambda_b)?;
        s.check_generic(params)?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.lambda_c.len()
    }

    pub fn lambda_c(&self) -> &[C64] {
        &self.lambda_c
    }

    pub fn lambda_b(&self) -> &[C64] {
        &self.lambda_b
    }

    /// Pairwise separation within and across the tuples and from every `μ_j`.
    pub fn check_generic(&self, params: &ModelParams) -> Result<()> {
        let floor = params.guard_floor();
        let named: Vec<(String, C64)> = self
            .lambda_c
            .iter()
            .enumerate()
            .map(|(i, &z)| (format!("lambdaC_{}", i + 1), z))
            .chain(
                self.lambda_b
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| (format!("lambdaB_{}", i + 1), z)),
            )
            .collect();
        for (i, (ni, zi)) in named.iter().enumerate() {
            for (nj, zj) in &named[i + 1..] {
                ensure_separated(zi - zj, floor, || format!("{ni} - {nj}"))?;
            }
            for (j, m) in params.mu().iter().enumerate() {
                ensure_separated(zi - m, floor, || format!("{ni} - mu_{}", j + 1))?;
            }
        }
        Ok(())
    }

    /// Copy with one entry replaced.
    pub fn with_value(&self, side: Side, index: usize, value: C64) -> Self {
        let mut s = self.clone();
        match side {
            Side::B => s.lambda_b[index] = value,
            Side::C => s.lambda_c[index] = value,
        }
        s
    }

    pub fn swapped(&self, side: Side, i: usize, j: usize) -> Self {
        let mut s = self.clone();
        match side {
            Side::B => s.lambda_b.swap(i, j),
            Side::C => s.lambda_c.swap(i, j),
        }
        s
    }

    /// Every entry shifted by `shift`.
    pub fn shifted(&self, shift: C64) -> Self {
        Self {
            lambda_c: self.lambda_c.iter().map(|z| z + shift).collect(),
            lambda_b: self.lambda_b.iter().map(|z| z + shift).collect(),
        }
    }
}

/// Which tuple a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    B,
    C,
}

/// A single variable of `S_n`, with 0-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub side: Side,
    pub index: usize,
}

/// `B(y_1)…B(y_n)|0>`.
pub fn bethe_vector(lambda_b: &[C64], params: &ModelParams) -> StateVector {
    let mut v = vacuum(params.len()).into_vec();
    for &y in lambda_b.iter().rev() {
        v = apply_entry(Entry::B, y, params, &v);
    }
    StateVector::from_vec(v)
}

/// `S_n(X|Y)` without genericity checks; exact zero for `n > L`.
///
/// Used directly by the functional-equation machinery, which deliberately
/// specializes arguments onto `μ_1` and `μ_1 - γ`.
pub fn scalar_product_raw(x: &[C64], y: &[C64], params: &ModelParams) -> C64 {
    assert_eq!(x.len(), y.len(), "scalar product needs equal tuple lengths");
    if x.len() > params.len() {
        return ZERO;
    }
    let mut v = bethe_vector(y, params).into_vec();
    for &lc in x.iter().rev() {
        v = apply_entry(Entry::C, lc, params, &v);
    }
    v[0]
}

/// `S_n` for validated tuples. For `n > L` the result is exactly zero.
pub fn scalar_product_direct(sets: &SpectralSets, params: &ModelParams) -> Result<C64> {
    Ok(scalar_product_raw(sets.lambda_c(), sets.lambda_b(), params))
}

/// Anything that can produce `S_n(X|Y)`.
pub trait ScalarProductEvaluator: Sync {
    fn name(&self) -> &str;

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64>;

    fn evaluate_sets(&self, sets: &SpectralSets, params: &ModelParams) -> Result<C64> {
        self.evaluate(sets.lambda_c(), sets.lambda_b(), params)
    }
}

/// The matrix-vector oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectOracle;

impl ScalarProductEvaluator for DirectOracle {
    fn name(&self) -> &str {
        "direct"
    }

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64> {
        Ok(scalar_product_raw(x, y, params))
    }
}

/// Deliberately corrupted evaluator `S_n + offset`, for sensitivity checks.
#[derive(Debug, Clone, Copy)]
pub struct OffsetEvaluator<E> {
    pub inner: E,
    pub offset: C64,
}

impl<E: ScalarProductEvaluator> ScalarProductEvaluator for OffsetEvaluator<E> {
    fn name(&self) -> &str {
        "negative-control"
    }

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64> {
        Ok(self.inner.evaluate(x, y, params)? + self.offset)
    }
}

/// Deliberately corrupted evaluator `S_n · exp(strength · (Σx_i + 2Σy_i))`.
///
/// Unlike a constant offset it is not annihilated by equations whose
/// solutions include constants.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedEvaluator<E> {
    pub inner: E,
    pub strength: f64,
}

impl<E: ScalarProductEvaluator> ScalarProductEvaluator for PerturbedEvaluator<E> {
    fn name(&self) -> &str {
        "perturbed"
    }

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64> {
        let t: C64 = x.iter().sum::<C64>() + y.iter().sum::<C64>() * 2.0;
        Ok(self.inner.evaluate(x, y, params)? * (t * self.strength).exp())
    }
}

/// `Λ(λ) = φ_1 ∏a(λ-μ_j) ∏ a(y_i-λ)/b(y_i-λ) + φ_2 ∏b(λ-μ_j) ∏ a(λ-y_i)/b(λ-y_i)`.
pub fn eigenvalue_formula(lambda: C64, roots: &[C64], params: &ModelParams) -> Result<C64> {
    let floor = params.guard_floor();
    let mut t1 = params.phi1() * params.prod_a(lambda);
    let mut t2 = params.phi2() * params.prod_b(lambda);
    for (i, &y) in roots.iter().enumerate() {
        ensure_separated(y - lambda, floor, || format!("lambdaB_{} - lambda", i + 1))?;
        t1 *= params.a(y - lambda) / params.b(y - lambda);
        t2 *= params.a(lambda - y) / params.b(lambda - y);
    }
    Ok(t1 + t2)
}

/// `‖T(λ)ψ - Λ(λ)ψ‖ / ‖Λ(λ)ψ‖` for `ψ = B(y_1)…B(y_n)|0>`.
pub fn eigenvector_residual(lambda: C64, roots: &[C64], params: &ModelParams) -> Result<f64> {
    let psi = bethe_vector(roots, params).into_vec();
    let a = apply_entry(Entry::A, lambda, params, &psi);
    let d = apply_entry(Entry::D, lambda, params, &psi);
    let ev = eigenvalue_formula(lambda, roots, params)?;
    let mut diff = 0.0;
    let mut scale = 0.0;
    for i in 0..psi.len() {
        let t = params.phi1() * a[i] + params.phi2() * d[i];
        diff += (t - ev * psi[i]).norm_sqr();
        scale += (ev * psi[i]).norm_sqr();
    }
    if scale == 0.0 {
        return Err(Error::Singular {
            factor: "Lambda(lambda) psi".into(),
            value: 0.0,
        });
    }
    Ok((diff / scale).sqrt())
}

/// Outcome of the polynomiality check in one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolynomialReport {
    pub variable: Variable,
    /// Relative error of the degree-(L-1) interpolant at the held-out node.
    pub prediction_error: f64,
    /// `|c_L| / max_{k<L} |c_k|` for a degree-L fit through `L+1` nodes.
    pub excess_degree_ratio: f64,
    /// 2-norm condition number of the sampling Vandermonde matrix.
    pub vandermonde_condition: f64,
}

impl PolynomialReport {
    pub fn worst(&self) -> f64 {
        self.prediction_error.max(self.excess_degree_ratio)
    }
}

fn vandermonde_condition(nodes: &[C64]) -> f64 {
    let k = nodes.len();
    let v = DMatrix::from_fn(k, k, |i, j| nodes[i].powu(j as u32));
    let sv = v.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// `x^{(L-1)/2} S_n` as a function of one variable, evaluated at `x = e^{iθ}`.
fn reduced_in_variable(theta: f64, sets: &SpectralSets, var: Variable, params: &ModelParams) -> C64 {
    let lambda = C64::new(0.0, theta / 2.0);
    let s = sets.with_value(var.side, var.index, lambda);
    let value = scalar_product_raw(s.lambda_c(), s.lambda_b(), params);
    value * (lambda * (params.len() as f64 - 1.0)).exp()
}

/// Checks that `x^{(L-1)/2} S_n` is a polynomial of degree `L-1` in `x = e^{2λ}`
/// for the chosen variable, all others fixed.
///
/// Nodes are the `L`-th roots of unity; the held-out point sits halfway
/// (in angle) between the first two nodes, the farthest point from all of them.
pub fn verify_polynomial_structure(params: &ModelParams, sets: &SpectralSets, var: Variable) -> Result<PolynomialReport> {
    let n = sets.n();
    if n == 0 || n > params.len() {
        return Err(Error::InvalidInput(format!("need 1 <= n <= L, got n = {n}")));
    }
    if var.index >= n {
        return Err(Error::InvalidInput(format!("variable index {} out of range", var.index)));
    }
    let l = params.len();
    let tau = std::f64::consts::TAU;
    let angles: Vec<f64> = (0..l).map(|k| tau * k as f64 / l as f64).collect();
    let nodes: Vec<C64> = angles.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let values: Vec<C64> = angles.iter().map(|&t| reduced_in_variable(t, sets, var, params)).collect();
    let held_angle = tau * 0.5 / l as f64;
    let expected = reduced_in_variable(held_angle, sets, var, params);
    let w = lagrange_weights(&nodes, C64::from_polar(1.0, held_angle));
    let predicted: C64 = w.iter().zip(&values).map(|(a, b)| a * b).sum();
    let scale = values.iter().map(|z| z.norm()).fold(expected.norm(), f64::max);
    let prediction_error = if scale == 0.0 { 0.0 } else { (predicted - expected).norm() / scale };

    // Degree-L fit through the (L+1)-th roots of unity is a discrete Fourier transform.
    let m = l + 1;
    let fit: Vec<C64> = (0..m)
        .map(|k| tau * k as f64 / m as f64)
        .map(|t| reduced_in_variable(t, sets, var, params))
        .collect();
    let coeff = |d: usize| -> C64 {
        fit.iter()
            .enumerate()
            .map(|(j, f)| f * C64::from_polar(1.0, -tau * (j * d) as f64 / m as f64))
            .sum::<C64>()
            / m as f64
    };
    let retained = (0..l).map(|d| coeff(d).norm()).fold(0.0, f64::max);
    let top = coeff(l).norm();
    let excess_degree_ratio = if retained == 0.0 { top } else { top / retained };

    Ok(PolynomialReport {
        variable: var,
        prediction_error,
        excess_degree_ratio,
        vandermonde_condition: vandermonde_condition(&nodes),
    })
}

/// `|S_n|` with `(v_1, v_2) = (μ_1 + shift, μ_1 - γ + shift)` on one side,
/// normalized by the largest `|S_n|` at four nearby generic placements of the pair.
///
/// `rest_same` supplies the remaining `n-2` variables of the specialized
/// side and `other` the `n` variables of the opposite side.
pub fn special_zero_ratio(params: &ModelParams, side: Side, shift: C64, rest_same: &[C64], other: &[C64]) -> f64 {
    let mu1 = params.mu()[0];
    let g = params.gamma();
    let eval = |p: C64, q: C64| {
        let mut same = vec![p, q];
        same.extend_from_slice(rest_same);
        match side {
            Side::B => scalar_product_raw(other, &same, params),
            Side::C => scalar_product_raw(&same, other, params),
        }
    };
    let value = eval(mu1 + shift, mu1 - g + shift);
    let scale = (0..4)
        .map(|k| {
            let d1 = C64::from_polar(0.15, std::f64::consts::FRAC_PI_2 * k as f64 + 0.3);
            let d2 = C64::from_polar(0.1, std::f64::consts::FRAC_PI_2 * k as f64 + 1.1);
            eval(mu1 + d1, mu1 - g + d2).norm()
        })
        .fold(0.0, f64::max);
    if scale == 0.0 {
        value.norm()
    } else {
        value.norm() / scale
    }
}

/// Normalized magnitudes of `S_n` at the special zeroes, per trial and side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialZeroReport {
    pub n: usize,
    pub b_side: Vec<f64>,
    pub c_side: Vec<f64>,
}

impl SpecialZeroReport {
    pub fn max(&self) -> f64 {
        self.b_side.iter().chain(&self.c_side).copied().fold(0.0, f64::max)
    }
}

/// Random draws of the remaining variables around both specializations.
pub fn verify_special_zeroes(params: &ModelParams, n: usize, trials: usize, seed: u64) -> Result<SpecialZeroReport> {
    if n < 2 || n > params.len() {
        return Err(Error::InvalidInput(format!("special zeroes need 2 <= n <= L, got n = {n}")));
    }
    let mut report = SpecialZeroReport {
        n,
        b_side: Vec::with_capacity(trials),
        c_side: Vec::with_capacity(trials),
    };
    for t in 0..trials {
        let mut rng = sampling::stream(seed, "special-zeroes", t as u64);
        let mu1 = params.mu()[0];
        let avoid = [mu1, mu1 - params.gamma()];
        let rest = sampling::spectral(&mut rng, params, n - 2, &avoid);
        let other = sampling::spectral(&mut rng, params, n, &avoid);
        report.b_side.push(special_zero_ratio(params, Side::B, ZERO, &rest, &other));
        report.c_side.push(special_zero_ratio(params, Side::C, ZERO, &rest, &other));
    }
    Ok(report)
}

/// Largest relative change of `S_n` under any adjacent transposition in either tuple.
pub fn symmetry_residual(sets: &SpectralSets, params: &ModelParams) -> f64 {
    let base = scalar_product_raw(sets.lambda_c(), sets.lambda_b(), params);
    let mut worst = 0.0f64;
    for side in [Side::B, Side::C] {
        for i in 1..sets.n() {
            let s = sets.swapped(side, i - 1, i);
            let v = scalar_product_raw(s.lambda_c(), s.lambda_b(), params);
            worst = worst.max(rel_diff(base, v));
        }
    }
    worst
}

/// Coefficient of `∏ (x^B_i x^C_i)^{(L-1)/2}` in the large-`x` limit of `S_n`:
/// `(q-q⁻¹)^{2n} / 2^{2nL} · q^{n(L-n)} · ([n]_{q²}!)² · e^{-2nΣμ} · Σ_{|a|=n} e^{2Σ_{j∈a} μ_j}`.
pub fn asymptotic_coefficient(params: &ModelParams, n: usize) -> Result<C64> {
    let l = params.len();
    if n > l {
        return Err(Error::InvalidInput(format!("need n <= L, got n = {n}, L = {l}")));
    }
    let q = params.aniso().q();
    let mu = params.mu();
    let total: C64 = mu.iter().sum();
    // elementary symmetric polynomial e_n of the e^{2μ_j}
    let mut elem = vec![ZERO; n + 1];
    elem[0] = ONE;
    for m in mu {
        let w = (m * 2.0).exp();
        for k in (1..=n).rev() {
            elem[k] = elem[k] + elem[k - 1] * w;
        }
    }
    let qf = q_factorial(n, q);
    Ok((q - ONE / q).powu(2 * n as u32) * 2f64.powi(-((2 * n * l) as i32))
        * q.powu((n * (l - n)) as u32)
        * qf
        * qf
        * (-(total * 2.0 * n as f64)).exp()
        * elem[n])
}

/// Deviation of the rescaled scalar product from its asymptotic coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub lambda0: f64,
    pub deviation: f64,
    pub deviation_next: f64,
    /// `deviation_next / deviation`; the leading correction predicts `e^{-2}`.
    pub decay_ratio: f64,
}

impl AsymptoticReport {
    /// Decay ratio within a factor `slack` of `e^{-2}`.
    pub fn decay_ok(&self, slack: f64) -> bool {
        let e = (-2.0f64).exp();
        self.decay_ratio >= e / slack && self.decay_ratio <= e * slack
    }
}

fn asymptotic_deviation(params: &ModelParams, offsets: &SpectralSets, lambda0: f64, coeff: C64) -> f64 {
    let shift = C64::new(lambda0, 0.0);
    let s = offsets.shifted(shift);
    let value = scalar_product_raw(s.lambda_c(), s.lambda_b(), params);
    let power: C64 = s.lambda_c().iter().chain(s.lambda_b()).sum::<C64>() * (params.len() as f64 - 1.0);
    (value * (-power).exp() - coeff).norm() / coeff.norm()
}

/// Evaluates `λ_i = Λ_0 + offset_i` and `Λ_0 + 1`.
pub fn verify_asymptotics(params: &ModelParams, offsets: &SpectralSets, lambda0: f64) -> Result<AsymptoticReport> {
    let n = offsets.n();
    let l = params.len();
    if n == 0 || n > l {
        return Err(Error::InvalidInput(format!("need 1 <= n <= L, got n = {n}")));
    }
    let reach = offsets
        .lambda_c()
        .iter()
        .chain(offsets.lambda_b())
        .map(|z| z.re.abs())
        .fold(0.0, f64::max);
    let budget = 2.0 * n as f64 * (l as f64 - 1.0) * (lambda0 + 1.0 + reach);
    if budget >= 700.0 {
        return Err(Error::Overflow(format!(
            "2n(L-1)(Λ0+1) = {budget:.0} exceeds the exponent budget of 700"
        )));
    }
    let coeff = asymptotic_coefficient(params, n)?;
    let deviation = asymptotic_deviation(params, offsets, lambda0, coeff);
    let deviation_next = asymptotic_deviation(params, offsets, lambda0 + 1.0, coeff);
    Ok(AsymptoticReport {
        lambda0,
        deviation,
        deviation_next,
        decay_ratio: deviation_next / deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{model, spectral, stream};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_case(tag: &str, k: u64, l: usize, n: usize) -> (ModelParams, SpectralSets) {
        let mut rng = stream(11, tag, k);
        let p = model(&mut rng, l).unwrap();
        let x = spectral(&mut rng, &p, n, &[]);
        let y = spectral(&mut rng, &p, n, &x);
        (p.clone(), SpectralSets::generic(x, y, &p).unwrap())
    }

    #[test]
    fn single_site_single_magnon_is_c_squared() {
        let p = ModelParams::new(c(0.4, 0.3), vec![c(0.2, -0.1)], ONE, ONE).unwrap();
        for k in 0..5 {
            let s = SpectralSets::new(vec![c(0.1 * k as f64, 0.7)], vec![c(-0.3, 0.2 * k as f64)]).unwrap();
            let v = scalar_product_direct(&s, &p).unwrap();
            assert!((v - p.c() * p.c()).norm() < 1e-15);
        }
    }

    #[test]
    fn too_many_magnons_vanish_exactly() {
        let (p, _) = random_case("nl", 0, 2, 1);
        let s = SpectralSets::new(vec![c(0.1, 0.0), c(0.2, 0.1), c(0.3, -0.2)], vec![c(-0.1, 0.0), c(0.5, 0.1), c(0.0, 0.4)]).unwrap();
        assert_eq!(scalar_product_direct(&s, &p).unwrap(), ZERO);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(SpectralSets::new(vec![ONE], vec![]).is_err());
    }

    #[test]
    fn genericity_rejects_collisions() {
        let (p, _) = random_case("gen", 0, 3, 1);
        let mu1 = p.mu()[0];
        assert!(matches!(
            SpectralSets::generic(vec![mu1], vec![c(0.31, 0.1)], &p),
            Err(Error::Separation { .. })
        ));
    }

    #[test]
    fn double_symmetry() {
        for k in 0..5 {
            let (p, s) = random_case("sym", k, 4, 3);
            assert!(symmetry_residual(&s, &p) <= 1e-13);
        }
    }

    #[test]
    fn special_zeroes_both_sides() {
        for (l, n) in [(3, 2), (4, 3), (4, 4)] {
            let (p, _) = random_case("zero", l as u64, l, n);
            let r = verify_special_zeroes(&p, n, 3, 5).unwrap();
            assert!(r.max() <= 1e-10, "L={l} n={n}: {r:?}");
        }
    }

    #[test]
    fn special_zero_is_sharp() {
        let (p, _) = random_case("zero", 3, 3, 2);
        let mut rng = stream(3, "sharp", 0);
        let other = spectral(&mut rng, &p, 2, &[]);
        let r = special_zero_ratio(&p, Side::B, c(1e-3, 0.0), &[], &other);
        assert!(r > 1e-6, "{r}");
    }

    #[test]
    fn polynomial_in_each_variable() {
        let (p, s) = random_case("poly", 0, 4, 2);
        for side in [Side::B, Side::C] {
            for index in 0..2 {
                let r = verify_polynomial_structure(&p, &s, Variable { side, index }).unwrap();
                assert!(r.prediction_error <= 1e-8, "{r:?}");
                assert!(r.excess_degree_ratio <= 1e-8, "{r:?}");
                assert!((r.vandermonde_condition - 1.0).abs() < 1e-10);
            }
        }
        let (p, s) = random_case("poly", 1, 2, 1);
        let r = verify_polynomial_structure(&p, &s, Variable { side: Side::B, index: 0 }).unwrap();
        assert!(r.prediction_error <= 1e-10);
    }

    #[test]
    fn asymptotic_coefficient_examples() {
        let p = ModelParams::new(c(0.4, 0.2), vec![c(0.7, -0.3)], ONE, ONE).unwrap();
        let k = asymptotic_coefficient(&p, 1).unwrap();
        assert!((k - p.c() * p.c()).norm() < 1e-14);

        let g = c(0.3, 0.1);
        let q = g.exp();
        let p = ModelParams::with_sep_floor(g, vec![ZERO, ZERO], ONE, ONE, 0.0).unwrap();
        let expected = (q - ONE / q).powu(2) / 16.0 * q * 2.0;
        assert!((asymptotic_coefficient(&p, 1).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn asymptotics_and_decay() {
        let (p, s) = random_case("asy", 0, 2, 1);
        let r = verify_asymptotics(&p, &s, 10.0).unwrap();
        assert!(r.deviation <= 1e-6, "{r:?}");
        assert!(r.decay_ok(3.0), "{r:?}");
        let (p, s) = random_case("asy", 1, 4, 2);
        let r = verify_asymptotics(&p, &s, 10.0).unwrap();
        assert!(r.deviation <= 1e-5, "{r:?}");
        assert!(r.decay_ok(3.0), "{r:?}");
    }

    #[test]
    fn eigenvalue_without_magnons() {
        let (p, _) = random_case("ev", 0, 3, 1);
        let l = c(0.2, 0.5);
        let ev = eigenvalue_formula(l, &[], &p).unwrap();
        let expected = p.phi1() * p.prod_a(l) + p.phi2() * p.prod_b(l);
        assert!((ev - expected).norm() < 1e-15);
        assert!(eigenvector_residual(l, &[], &p).unwrap() < 1e-14);
        let at_mu = eigenvalue_formula(p.mu()[0], &[c(0.3, 0.3)], &p).unwrap();
        let first = p.phi1() * p.prod_a(p.mu()[0]) * p.a(c(0.3, 0.3) - p.mu()[0]) / p.b(c(0.3, 0.3) - p.mu()[0]);
        assert!((at_mu - first).norm() < 1e-14 * first.norm());
    }

    #[test]
    fn offset_evaluator_adds_constant() {
        let (p, s) = random_case("off", 0, 2, 1);
        let e = OffsetEvaluator { inner: DirectOracle, offset: c(0.5, 0.0) };
        let v = e.evaluate_sets(&s, &p).unwrap();
        let d = DirectOracle.evaluate_sets(&s, &p).unwrap();
        assert_eq!(v - d, c(0.5, 0.0));
    }
}
