//! Multiple contour-integral representation of `S_n`.
//!
//! The integral
//! `∮…∮ ∏ dw_i/(2πi) dw̄_i/(2πi) H(w|w̄) / ∏_{i,j} b(w_i-x_j) b(w̄_i-y_j)`
//! with `w`-contours around `x_j = λ^C_j` and `w̄`-contours around
//! `y_j = λ^B_j` is evaluated by residue summation. Since `b = sinh` has
//! unit derivative at zero, the injective assignments contribute
//! `H(x_σ | y_τ) / (∏_{m≠j} b(x_m-x_j) ∏_{m≠j} b(y_m-y_j))`; the others
//! vanish because of the `b(w_i-w_j)²` factors in `H`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monodromy::ModelParams;
use crate::numeric::{ensure_nonzero, ensure_separated, CompensatedSum};
use crate::oracle::ScalarProductEvaluator;

const ONE: C64 = C64::new(1.0, 0.0);

/// Which integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    OffShell,
    OnShell,
}

/// One evaluation of `H`, with the singular factor named when it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HEvaluation {
    pub w: Vec<C64>,
    pub wbar: Vec<C64>,
    pub variant: Variant,
    pub value: Option<C64>,
    pub singular: Option<String>,
}

impl HEvaluation {
    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }
}

pub fn evaluate_h(variant: Variant, w: &[C64], wbar: &[C64], params: &ModelParams) -> HEvaluation {
    let r = match variant {
        Variant::OffShell => h_offshell(w, wbar, params),
        Variant::OnShell => h_onshell(w, wbar, params),
    };
    let (value, singular) = match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    HEvaluation {
        w: w.to_vec(),
        wbar: wbar.to_vec(),
        variant,
        value,
        singular,
    }
}

fn check_shapes(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<usize> {
    let n = w.len();
    if n == 0 || n != wbar.len() {
        return Err(Error::InvalidInput("H needs 1 <= n and |w| = |wbar|".into()));
    }
    if n > params.len() {
        return Err(Error::InvalidInput(format!("H needs n <= L, got n = {n}, L = {}", params.len())));
    }
    Ok(n)
}

/// Guards `b(w_i - μ_i)` and `b(w̄_i - μ_i)`.
fn check_diagonal(w: &[C64], wbar: &[C64], mu: &[C64], floor: f64) -> Result<()> {
    for i in 0..w.len() {
        ensure_separated(w[i] - mu[i], floor, || format!("w_{0} - mu_{0}", i + 1))?;
        ensure_separated(wbar[i] - mu[i], floor, || format!("wbar_{0} - mu_{0}", i + 1))?;
    }
    Ok(())
}

/// `R_i = ∏_{k≥i} a(w_k-μ_i)/b(w_k-μ_i) - ∏_{k≥i} a(w̄_k-μ_i)/b(w̄_k-μ_i)` (0-based `i`).
fn r_factor(i: usize, w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let mi = params.mu()[i];
    let p = |set: &[C64]| set[i..].iter().map(|&z| params.a(z - mi) / params.b(z - mi)).product::<C64>();
    let (pw, pb) = (p(w), p(wbar));
    let r = pw - pb;
    ensure_nonzero(r, pw.norm().max(pb.norm()), || format!("R_{}", i + 1))?;
    Ok(r)
}

fn pairwise_b(set: &[C64], floor: f64, name: &str) -> Result<()> {
    for i in 0..set.len() {
        for j in (i + 1)..set.len() {
            ensure_separated(set[i] - set[j], floor, || format!("{name}_{} - {name}_{}", i + 1, j + 1))?;
        }
    }
    Ok(())
}

/// Off-shell `Λ_i` (0-based `i`).
fn lambda_off(i: usize, w: &[C64], wbar: &[C64], params: &ModelParams) -> C64 {
    let (a, b) = (|z| params.a(z), |z| params.b(z));
    let mu = params.mu();
    let n = w.len();
    let (wi, vi) = (w[i], wbar[i]);
    let mut t1: C64 = mu[i..].iter().map(|&m| a(vi - m) * b(m - wi)).product();
    let mut t2: C64 = mu[i..].iter().map(|&m| a(wi - m) * b(m - vi)).product();
    for k in (i + 1)..n {
        t1 *= a(wi - w[k]) / b(wi - w[k]) * a(wbar[k] - vi) / b(wbar[k] - vi);
        t2 *= a(w[k] - wi) / b(w[k] - wi) * a(vi - wbar[k]) / b(vi - wbar[k]);
    }
    t1 - t2
}

/// Closed-form off-shell integrand:
/// `(-1)^{Ln+n(n+1)/2} c^{2n} ∏_{j>i} b(w_i-w_j)² b(w̄_i-w̄_j)² a(w_j-μ_i) a(w̄_j-μ_i)
///  / ∏ b(w_i-μ_i) b(w̄_i-μ_i) · ∏ Λ_i / R_i`.
pub fn h_offshell(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let n = check_shapes(w, wbar, params)?;
    let floor = params.guard_floor();
    let mu = params.mu();
    check_diagonal(w, wbar, mu, floor)?;
    pairwise_b(w, floor, "w")?;
    pairwise_b(wbar, floor, "wbar")?;
    let (a, b, c) = (|z| params.a(z), |z| params.b(z), params.c());
    let l = params.len();
    let sign = if (l * n + n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut h = c.powu(2 * n as u32) * sign;
    for i in 0..n {
        for j in (i + 1)..n {
            let bw = b(w[i] - w[j]);
            let bv = b(wbar[i] - wbar[j]);
            h *= bw * bw * bv * bv * a(w[j] - mu[i]) * a(wbar[j] - mu[i]);
        }
        h /= b(w[i] - mu[i]) * b(wbar[i] - mu[i]);
    }
    for i in 0..n {
        h *= lambda_off(i, w, wbar, params) / r_factor(i, w, wbar, params)?;
    }
    Ok(h)
}

/// `H(w|w̄)` for `n = 1`:
/// `c² [∏a(w-μ)b(w̄-μ) - ∏a(w̄-μ)b(w-μ)] / (b(w-μ_1) b(w̄-μ_1) [a/b(w-μ_1) - a/b(w̄-μ_1)])`.
pub fn h_n1(w: C64, wbar: C64, params: &ModelParams) -> Result<C64> {
    let floor = params.guard_floor();
    let mu1 = params.mu()[0];
    ensure_separated(w - mu1, floor, || "w_1 - mu_1".into())?;
    ensure_separated(wbar - mu1, floor, || "wbar_1 - mu_1".into())?;
    let (a, b, c) = (|z| params.a(z), |z| params.b(z), params.c());
    let num = params.prod_a(w) * params.prod_b(wbar) - params.prod_a(wbar) * params.prod_b(w);
    let (rw, rv) = (a(w - mu1) / b(w - mu1), a(wbar - mu1) / b(wbar - mu1));
    let r = rw - rv;
    ensure_nonzero(r, rw.norm().max(rv.norm()), || "R_1".into())?;
    Ok(c * c * num / (b(w - mu1) * b(wbar - mu1) * r))
}

/// Off-shell integrand built by peeling `(w_1, w̄_1, μ_1)` repeatedly:
/// `H = κ · [one reduction step] · H̄(w_2.. | w̄_2.. ; μ_2..μ_L)` down to the
/// `n = 1` base. `H̄` is fixed only up to a constant by the reduction; the
/// constant `κ = (-1)^{L+1} c² ∏_{k≥2} a(μ_1-μ_k) a(μ_k-μ_1)` matches the
/// normalization of [`h_offshell`].
pub fn h_offshell_recursive(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let n = check_shapes(w, wbar, params)?;
    if n == 1 {
        return h_n1(w[0], wbar[0], params);
    }
    let reduced = params.without_first_site()?;
    let inner = h_offshell_recursive(&w[1..], &wbar[1..], &reduced)?;

    let floor = params.guard_floor();
    let (a, b, c) = (|z| params.a(z), |z| params.b(z), params.c());
    let mu = params.mu();
    let mu1 = mu[0];
    let (w1, v1) = (w[0], wbar[0]);
    ensure_separated(w1 - mu1, floor, || "w_1 - mu_1".into())?;
    ensure_separated(v1 - mu1, floor, || "wbar_1 - mu_1".into())?;
    pairwise_b(w, floor, "w")?;
    pairwise_b(wbar, floor, "wbar")?;

    let mut pairs = ONE;
    for &mk in &mu[1..] {
        pairs *= a(mu1 - mk) * a(mk - mu1);
    }
    ensure_nonzero(pairs, 1.0, || "a(mu_1 - mu_k) a(mu_k - mu_1)".into())?;

    let mut h = inner / (b(w1 - mu1) * b(v1 - mu1));
    for k in 1..n {
        let (bw, bv) = (b(w1 - w[k]), b(v1 - wbar[k]));
        h *= bw * bw * bv * bv * a(w[k] - mu1) * a(wbar[k] - mu1);
    }
    h /= pairs;
    h /= r_factor(0, w, wbar, params)?;
    h *= lambda_off(0, w, wbar, params);

    let l = params.len();
    let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
    Ok(h * c * c * pairs * sign)
}

/// On-shell `Λ_i^ON` (0-based `i`).
fn lambda_on(i: usize, w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let (a, b) = (|z| params.a(z), |z| params.b(z));
    let mu = params.mu();
    let n = w.len();
    let (wi, vi) = (w[i], wbar[i]);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut t1: C64 = mu[i..].iter().map(|&m| a(wi - m)).product::<C64>() * sign;
    let mut t2: C64 = mu[i..].iter().map(|&m| b(wi - m)).product::<C64>() * (params.phi2() / params.phi1());
    for k in 0..i {
        let (bd, ad) = (b(vi - mu[k]), a(vi - mu[k]));
        ensure_nonzero(bd, 1.0, || format!("b(wbar_{} - mu_{})", i + 1, k + 1))?;
        ensure_nonzero(ad, 1.0, || format!("a(wbar_{} - mu_{})", i + 1, k + 1))?;
        let den = a(wbar[k] - vi);
        ensure_nonzero(den, 1.0, || format!("a(wbar_{} - wbar_{})", k + 1, i + 1))?;
        t1 /= bd;
        t2 *= a(vi - wbar[k]) / (ad * den);
    }
    for &wk in &w[i + 1..n] {
        t1 *= a(wk - wi);
        t2 *= a(wi - wk);
    }
    Ok(t1 + t2)
}

/// Closed-form on-shell integrand, intended for `w̄` at Bethe roots.
///
/// The overall sign is `(-1)^{n(n+1)/2}`, which is what reproduces the
/// scalar product at solved roots for every tested `(n, L)`.
pub fn h_onshell(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let n = check_shapes(w, wbar, params)?;
    let floor = params.guard_floor();
    let mu = params.mu();
    check_diagonal(w, wbar, mu, floor)?;
    let (a, b, c) = (|z| params.a(z), |z| params.b(z), params.c());
    let sign = if (n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut h = c.powu(2 * n as u32) * sign;
    for i in 0..n {
        h *= params.prod_b(wbar[i]) / (b(wbar[i] - mu[i]) * b(w[i] - mu[i]));
        for j in (i + 1)..n {
            h *= a(wbar[i] - wbar[j]) * a(wbar[j] - mu[i]) * b(wbar[j] - wbar[i]) * a(w[j] - mu[i]) * b(w[j] - w[i]);
        }
    }
    for i in 0..n {
        h *= lambda_on(i, w, wbar, params)? / r_factor(i, w, wbar, params)?;
    }
    Ok(h)
}

/// One factor of the on-shell iteration `H^(s) = [factor] · H^(s+1)` (0-based `s`).
fn onshell_step(s: usize, w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let (a, b) = (|z| params.a(z), |z| params.b(z));
    let mu = params.mu();
    let n = w.len();
    let l = params.len();
    let ms = mu[s];
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let mut f = params.prod_b(wbar[s]) * sign;
    for k in (s + 1)..n {
        f *= a(w[k] - ms) * b(w[k] - w[s]);
        f *= a(wbar[s] - wbar[k]) * a(wbar[k] - ms) * b(wbar[k] - wbar[s]);
    }
    let mut den = b(w[s] - ms) * b(wbar[s] - ms);
    for &mk in &mu[(s + 1)..] {
        den *= a(ms - mk) * a(mk - ms);
    }
    ensure_nonzero(den, 1.0, || format!("denominator of H^({})", s + 1))?;
    Ok(f / den / r_factor(s, w, wbar, params)? * lambda_on(s, w, wbar, params)?)
}

/// `H^(n)(w_n | w̄_n)`.
fn onshell_last(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let n = w.len();
    let s = n - 1;
    let (b, c) = (|z| params.b(z), params.c());
    let ms = params.mu()[s];
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pre = c * c * sign * params.prod_b(wbar[s]) / (b(w[s] - ms) * b(wbar[s] - ms));
    Ok(pre / r_factor(s, w, wbar, params)? * lambda_on(s, w, wbar, params)?)
}

/// On-shell integrand by the step-by-step iteration from `s = 1` to `n-1`
/// followed by `H^(n)`. Each step is defined up to a constant; the factor
/// `(-1)^{L+n-s} c² ∏_{k>s} a(μ_s-μ_k) a(μ_k-μ_s)` per step aligns it with
/// [`h_onshell`].
pub fn h_onshell_stepwise(w: &[C64], wbar: &[C64], params: &ModelParams) -> Result<C64> {
    let n = check_shapes(w, wbar, params)?;
    let floor = params.guard_floor();
    let mu = params.mu();
    check_diagonal(w, wbar, mu, floor)?;
    let (a, c) = (|z| params.a(z), params.c());
    let l = params.len();
    let mut h = onshell_last(w, wbar, params)?;
    for s in 0..(n - 1) {
        let mut norm = c * c;
        for &mk in &mu[(s + 1)..] {
            norm *= a(mu[s] - mk) * a(mk - mu[s]);
        }
        // 1-based step index s+1
        if (l + n - (s + 1)) % 2 == 1 {
            norm = -norm;
        }
        h *= norm * onshell_step(s, w, wbar, params)?;
    }
    Ok(h)
}

/// Value of the residue sum and how much it cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValue {
    pub value: C64,
    /// `max |term| / |value|`.
    pub cancellation_ratio: f64,
    /// Number of `(σ, τ)` assignments summed.
    pub terms: usize,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn vandermonde_b(set: &[C64], params: &ModelParams, name: &str) -> Result<C64> {
    let floor = params.guard_floor();
    let mut d = ONE;
    for (m, &zm) in set.iter().enumerate() {
        for (j, &zj) in set.iter().enumerate() {
            if j != m {
                ensure_separated(zm - zj, floor, || format!("{name}_{} - {name}_{}", m + 1, j + 1))?;
                d *= params.b(zm - zj);
            }
        }
    }
    Ok(d)
}

/// Residue sum over injective assignments, in lexicographic `(σ, τ)` order.
///
/// The outer permutation is distributed over threads; each partial sum is
/// compensated and they are merged in `σ` order, so the result does not
/// depend on the thread count.
pub fn evaluate_integral(x: &[C64], y: &[C64], params: &ModelParams, variant: Variant) -> Result<IntegralValue> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidInput("integral needs 1 <= n and |X| = |Y|".into()));
    }
    if n > params.len() {
        return Err(Error::InvalidInput(format!("integral needs n <= L, got n = {n}, L = {}", params.len())));
    }
    let denom = vandermonde_b(x, params, "lambdaC")? * vandermonde_b(y, params, "lambdaB")?;
    let perms = permutations(n);
    let partials: Vec<Result<CompensatedSum>> = perms
        .par_iter()
        .map(|sigma| {
            let w: Vec<C64> = sigma.iter().map(|&i| x[i]).collect();
            let mut acc = CompensatedSum::new();
            for tau in &perms {
                let wbar: Vec<C64> = tau.iter().map(|&i| y[i]).collect();
                let h = match variant {
                    Variant::OffShell => h_offshell(&w, &wbar, params),
                    Variant::OnShell => h_onshell(&w, &wbar, params),
                }
                .map_err(|e| match e {
                    Error::Singular { factor, value } => Error::Singular {
                        factor: format!("{factor} at assignment sigma={sigma:?} tau={tau:?}"),
                        value,
                    },
                    Error::Separation { what, value, floor } => Error::Separation {
                        what: format!("{what} at assignment sigma={sigma:?} tau={tau:?}"),
                        value,
                        floor,
                    },
                    other => other,
                })?;
                acc.add(h / denom);
            }
            Ok(acc)
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in partials {
        total.merge(&p?);
    }
    Ok(IntegralValue {
        value: total.value(),
        cancellation_ratio: total.cancellation_ratio(),
        terms: perms.len() * perms.len(),
    })
}

/// The contour integral as a scalar-product evaluator.
#[derive(Debug, Clone, Copy)]
pub struct IntegralEvaluator {
    pub variant: Variant,
}

impl ScalarProductEvaluator for IntegralEvaluator {
    fn name(&self) -> &str {
        match self.variant {
            Variant::OffShell => "integral-offshell",
            Variant::OnShell => "integral-onshell",
        }
    }

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64> {
        Ok(evaluate_integral(x, y, params, self.variant)?.value)
    }
}

/// `S_1 = c/b(x-y) [∏a(y-μ)b(x-μ) - ∏a(x-μ)b(y-μ)]`.
pub fn s1_closed(lc: C64, lb: C64, params: &ModelParams) -> Result<C64> {
    ensure_separated(lc - lb, params.guard_floor(), || "lambdaC - lambdaB".into())?;
    let bracket = params.prod_a(lb) * params.prod_b(lc) - params.prod_a(lc) * params.prod_b(lb);
    Ok(params.c() / params.b(lc - lb) * bracket)
}

/// `lim_{x → y} S_1(x|y)` by symmetric offsets `±h`, `±h/2` and one Richardson step.
pub fn s1_closed_limit(l: C64, params: &ModelParams, h: f64) -> C64 {
    let f = |d: C64| {
        let bracket = params.prod_a(l) * params.prod_b(l + d) - params.prod_a(l + d) * params.prod_b(l);
        params.c() / params.b(d) * bracket
    };
    let dir = C64::from_polar(1.0, 0.3);
    let sym = |t: f64| (f(dir * t) + f(-dir * t)) / 2.0;
    (sym(h / 2.0) * 4.0 - sym(h)) / 3.0
}

/// Closed `n = 1` formula as an evaluator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedN1;

impl ScalarProductEvaluator for ClosedN1 {
    fn name(&self) -> &str {
        "closed-n1"
    }

    fn evaluate(&self, x: &[C64], y: &[C64], params: &ModelParams) -> Result<C64> {
        if x.len() != 1 || y.len() != 1 {
            return Err(Error::InvalidInput("closed-n1 requires n = 1".into()));
        }
        s1_closed(x[0], y[0], params)
    }
}

/// Double-residue check for `n = 2`: both `w`-contours around the same `x_m`,
/// `w̄` fixed at `y_τ` (already residue-evaluated), by a trapezoid rule on two
/// concentric circles of different radii. Returns `|quadrature| / max |injective term|`.
pub fn non_injective_residue(
    x: &[C64],
    y: &[C64],
    m: usize,
    params: &ModelParams,
    nodes: usize,
    radius: f64,
) -> Result<f64> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::InvalidInput("non-injective residue check is for n = 2".into()));
    }
    let dy = vandermonde_b(y, params, "lambdaB")?;
    let dx = vandermonde_b(x, params, "lambdaC")?;
    let xm = x[m];
    let r1 = radius;
    let r2 = radius * 0.7;
    let tau = std::f64::consts::TAU;
    let mut acc = CompensatedSum::new();
    for k in 0..nodes {
        let e1 = C64::from_polar(r1, tau * (k as f64 + 0.25) / nodes as f64);
        let w1 = xm + e1;
        for l in 0..nodes {
            let e2 = C64::from_polar(r2, tau * (l as f64 + 0.6) / nodes as f64);
            let w2 = xm + e2;
            let h = h_offshell(&[w1, w2], y, params)?;
            let den: C64 = x.iter().map(|&xj| params.b(w1 - xj) * params.b(w2 - xj)).product();
            // dw/(2πi) = e dθ/(2π)
            acc.add(h / den / dy * e1 * e2);
        }
    }
    let quad = acc.value() / (nodes * nodes) as f64;
    let mut leading = 0.0f64;
    for sigma in permutations(2) {
        let w: Vec<C64> = sigma.iter().map(|&i| x[i]).collect();
        let h = h_offshell(&w, y, params)?;
        leading = leading.max((h / (dx * dy)).norm());
    }
    Ok(quad.norm() / leading)
}
