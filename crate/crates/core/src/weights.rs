//! Boltzmann weights of the six-vertex model, its R-matrix and the
//! q-factorial.
//!
//! With crossing parameter `gamma` the three weights are
//!
//! ```text
//! a(λ) = sinh(λ + γ),   b(λ) = sinh(λ),   c = sinh(γ)
//! ```
//!
//! and the R-matrix on `V_a ⊗ V_b` (basis `|00>, |01>, |10>, |11>`) is
//!
//! ```text
//! | a 0 0 0 |
//! | 0 b c 0 |
//! | 0 c b 0 |
//! | 0 0 0 a |
//! ```
//!
//! Only entire functions appear here, so no branch choices are needed.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `|sinh(gamma)|`.
pub const MIN_SINH_GAMMA: f64 = 1e-8;

/// Crossing parameter `gamma` together with `q = e^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C64", into = "C64")]
pub struct Anisotropy {
    gamma: C64,
    q: C64,
}

impl Anisotropy {
    /// Rejects `gamma` with `sinh(gamma) = 0` (integer multiples of `i*pi`).
    pub fn new(gamma: C64) -> Result<Self> {
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be finite, got {gamma}")));
        }
        let magnitude = gamma.sinh().norm();
        if magnitude < MIN_SINH_GAMMA {
            return Err(Error::DegenerateAnisotropy { magnitude });
        }
        Ok(Self { gamma, q: gamma.exp() })
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    #[inline]
    pub fn a(&self, lambda: C64) -> C64 {
        (lambda + self.gamma).sinh()
    }

    #[inline]
    pub fn b(&self, lambda: C64) -> C64 {
        lambda.sinh()
    }

    #[inline]
    pub fn c(&self) -> C64 {
        self.gamma.sinh()
    }
}

impl TryFrom<C64> for Anisotropy {
    type Error = Error;

    fn try_from(gamma: C64) -> Result<Self> {
        Anisotropy::new(gamma)
    }
}

impl From<Anisotropy> for C64 {
    fn from(a: Anisotropy) -> C64 {
        a.gamma
    }
}

/// `a(λ) = sinh(λ + γ)`.
pub fn weight_a(lambda: C64, gamma: C64) -> C64 {
    (lambda + gamma).sinh()
}

/// `b(λ) = sinh(λ)`; `gamma` is accepted for signature symmetry.
pub fn weight_b(lambda: C64, _gamma: C64) -> C64 {
    lambda.sinh()
}

/// `c = sinh(γ)`, independent of the spectral parameter.
pub fn weight_c(_lambda: C64, gamma: C64) -> C64 {
    gamma.sinh()
}

/// The six-vertex R-matrix at a fixed spectral difference.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    lambda: C64,
    entries: Matrix4<C64>,
}

impl RMatrix {
    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn entries(&self) -> &Matrix4<C64> {
        &self.entries
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_iterator(4, 4, self.entries.iter().copied())
    }

    /// `R_21 = P R_12 P`.
    pub fn swapped(&self) -> RMatrix {
        let p = permutation();
        RMatrix {
            lambda: self.lambda,
            entries: p * self.entries * p,
        }
    }
}

/// Builds the R-matrix with the exact six-entry zero pattern.
pub fn build_r_matrix(lambda: C64, aniso: &Anisotropy) -> RMatrix {
    let z = C64::new(0.0, 0.0);
    let (a, b, c) = (aniso.a(lambda), aniso.b(lambda), aniso.c());
    #[rustfmt::skip]
    let entries = Matrix4::new(
        a, z, z, z,
        z, b, c, z,
        z, c, b, z,
        z, z, z, a,
    );
    RMatrix { lambda, entries }
}

/// The swap operator on `C^2 ⊗ C^2`.
pub fn permutation() -> Matrix4<C64> {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let p = Matrix4::new(
        o, z, z, z,
        z, z, o, z,
        z, o, z, z,
        z, z, z, o,
    );
    p
}

/// Embeds a two-site operator acting on factors `(i, j)` of a three-fold
/// tensor product `C^2 ⊗ C^2 ⊗ C^2` (factor 0 is the most significant bit).
fn embed_pair(r: &Matrix4<C64>, i: usize, j: usize) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(8, 8, C64::new(0.0, 0.0));
    let bit = |state: usize, k: usize| (state >> (2 - k)) & 1;
    for row in 0..8 {
        for col in 0..8 {
            // spectator factor must agree
            let spectator = 3 - i - j;
            if bit(row, spectator) != bit(col, spectator) {
                continue;
            }
            let r_idx = 2 * bit(row, i) + bit(row, j);
            let c_idx = 2 * bit(col, i) + bit(col, j);
            out[(row, col)] = r[(r_idx, c_idx)];
        }
    }
    out
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Relative max-norm residual of the Yang-Baxter equation
/// `R12(l1-l2) R13(l1-l3) R23(l2-l3) = R23(l2-l3) R13(l1-l3) R12(l1-l2)`.
pub fn yang_baxter_residual(l1: C64, l2: C64, l3: C64, aniso: &Anisotropy) -> f64 {
    let r12 = embed_pair(build_r_matrix(l1 - l2, aniso).entries(), 0, 1);
    let r13 = embed_pair(build_r_matrix(l1 - l3, aniso).entries(), 0, 2);
    let r23 = embed_pair(build_r_matrix(l2 - l3, aniso).entries(), 1, 2);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    let scale = max_abs(&lhs);
    if scale == 0.0 {
        return max_abs(&rhs);
    }
    max_abs(&(lhs - rhs)) / scale
}

/// Relative residual of `R12(λ) R21(-λ) = a(λ) a(-λ) · 1`.
pub fn unitarity_residual(lambda: C64, aniso: &Anisotropy) -> f64 {
    let prod = build_r_matrix(lambda, aniso).entries() * build_r_matrix(-lambda, aniso).swapped().entries();
    let expected = Matrix4::<C64>::identity() * (aniso.a(lambda) * aniso.a(-lambda));
    let scale = prod.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = (prod - expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// `[n!]_{q^2} = ∏_{k=1}^{n} (1 + q^2 + … + q^{2(k-1)})`; the empty product is 1.
pub fn q_factorial(n: usize, q: C64) -> C64 {
    let q2 = q * q;
    let mut result = C64::new(1.0, 0.0);
    let mut bracket = C64::new(0.0, 0.0);
    let mut power = C64::new(1.0, 0.0);
    for _ in 0..n {
        bracket += power;
        power *= q2;
        result *= bracket;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn weight_values() {
        let g = c(0.7, 0.0);
        assert_eq!(weight_b(c(0.0, 0.0), g), c(0.0, 0.0));
        assert_eq!(weight_a(c(0.0, 0.0), g), weight_c(c(3.0, -1.0), g));
        // sinh(1.0 + 0.1i) = sinh(1)cos(0.1) + i cosh(1) sin(0.1)
        let expected = c(1.0f64.sinh() * 0.1f64.cos(), 1.0f64.cosh() * 0.1f64.sin());
        let got = weight_a(c(0.3, 0.1), g);
        assert!((got - expected).norm() < 1e-15);
        assert!((got - c(1.169_330, 0.154_051)).norm() < 1e-6);
    }

    #[test]
    fn addition_theorem() {
        let aniso = Anisotropy::new(c(0.43, -0.2)).unwrap();
        let g = aniso.gamma();
        for k in 0..10 {
            let l = c(0.17 * k as f64 - 0.8, 0.3 - 0.11 * k as f64);
            let lhs = aniso.a(l) - aniso.b(l) * g.cosh();
            let rhs = g.sinh() * l.cosh();
            assert!((lhs - rhs).norm() < 1e-14 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn r_matrix_at_zero_is_scaled_permutation() {
        let aniso = Anisotropy::new(c(0.5, 0.25)).unwrap();
        let r = build_r_matrix(c(0.0, 0.0), &aniso);
        let expected = permutation() * aniso.c();
        assert_eq!(*r.entries(), expected);
    }

    #[test]
    fn r_matrix_zero_pattern() {
        let aniso = Anisotropy::new(c(0.5, 0.25)).unwrap();
        let r = build_r_matrix(c(0.31, -0.77), &aniso);
        let nonzero: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| r.entries()[(i, j)] != c(0.0, 0.0))
            .collect();
        assert_eq!(nonzero, vec![(0, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn yang_baxter_degenerate_arguments() {
        let aniso = Anisotropy::new(c(0.9, 0.1)).unwrap();
        let l = c(0.2, 0.4);
        assert!(yang_baxter_residual(l, l, l, &aniso) <= 1e-13);
    }

    #[test]
    fn q_factorial_small_values() {
        let q = c(0.8, 0.3);
        assert_eq!(q_factorial(0, q), c(1.0, 0.0));
        assert_eq!(q_factorial(1, q), c(1.0, 0.0));
        assert!((q_factorial(2, q) - (c(1.0, 0.0) + q * q)).norm() < 1e-15);
        assert_eq!(q_factorial(3, c(1.0, 0.0)), c(6.0, 0.0));
        let mut fact = 1.0;
        for n in 1..=8 {
            fact *= n as f64;
            assert_eq!(q_factorial(n, c(1.0, 0.0)), c(fact, 0.0));
        }
    }

    #[test]
    fn degenerate_gamma_rejected() {
        assert!(matches!(
            Anisotropy::new(c(0.0, 0.0)),
            Err(Error::DegenerateAnisotropy { .. })
        ));
        assert!(Anisotropy::new(c(0.0, std::f64::consts::PI)).is_err());
        let a = Anisotropy::new(c(0.3, 0.2)).unwrap();
        assert_eq!(a.q(), a.gamma().exp());
    }
}
