//! Small numerical helpers shared by every module: compensated complex
//! summation, relative residuals and separation guards.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator for complex sums.
///
/// Real and imaginary parts are compensated independently. The accumulator
/// also tracks the largest term magnitude so callers can report how much
/// cancellation took place.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_err: f64,
    im: f64,
    im_err: f64,
    max_term: f64,
    abs_total: f64,
}

fn neumaier(sum: &mut f64, err: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *err += (*sum - t) + x;
    } else {
        *err += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, &mut self.re_err, z.re);
        neumaier(&mut self.im, &mut self.im_err, z.im);
        let m = z.norm();
        self.max_term = self.max_term.max(m);
        self.abs_total += m;
    }

    /// Merge another partial sum (used for fixed-order parallel reductions).
    pub fn merge(&mut self, other: &CompensatedSum) {
        neumaier(&mut self.re, &mut self.re_err, other.re);
        neumaier(&mut self.re, &mut self.re_err, other.re_err);
        neumaier(&mut self.im, &mut self.im_err, other.im);
        neumaier(&mut self.im, &mut self.im_err, other.im_err);
        self.max_term = self.max_term.max(other.max_term);
        self.abs_total += other.abs_total;
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re + self.re_err, self.im + self.im_err)
    }

    pub fn max_term(&self) -> f64 {
        self.max_term
    }

    /// Sum of the magnitudes of all terms.
    pub fn abs_total(&self) -> f64 {
        self.abs_total
    }

    /// `max |term| / |sum|`; infinite when the sum cancels exactly.
    pub fn cancellation_ratio(&self) -> f64 {
        let v = self.value().norm();
        if v == 0.0 {
            f64::INFINITY
        } else {
            self.max_term / v
        }
    }
}

impl FromIterator<C64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Residual of a vanishing linear combination, normalized by the sum of term magnitudes.
pub fn normalized_sum_residual(terms: &[C64]) -> (f64, f64) {
    let acc: CompensatedSum = terms.iter().copied().collect();
    let scale = acc.abs_total();
    let r = if scale == 0.0 {
        0.0
    } else {
        acc.value().norm() / scale
    };
    (r, scale)
}

/// Fails with [`Error::Separation`] when `|sinh(z)| < floor`.
pub fn ensure_separated(z: C64, floor: f64, what: impl FnOnce() -> String) -> Result<()> {
    let v = z.sinh().norm();
    if v < floor || !v.is_finite() {
        Err(Error::Separation {
            what: what(),
            value: v,
            floor,
        })
    } else {
        Ok(())
    }
}

/// Fails with [`Error::Singular`] when a denominator is (relatively) zero.
pub fn ensure_nonzero(z: C64, scale: f64, factor: impl FnOnce() -> String) -> Result<()> {
    let v = z.norm();
    if !v.is_finite() || v <= 1e-13 * scale.max(f64::MIN_POSITIVE) || v == 0.0 {
        Err(Error::Singular {
            factor: factor(),
            value: v,
        })
    } else {
        Ok(())
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lagrange basis weights `ℓ_k(at)` for the given nodes, so that the
/// interpolant through `(nodes[k], f_k)` evaluates to `Σ ℓ_k f_k` at `at`.
pub fn lagrange_weights(nodes: &[C64], at: C64) -> Vec<C64> {
    (0..nodes.len())
        .map(|k| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| (at - xj) / (nodes[k] - xj))
                .product()
        })
        .collect()
}

/// Imaginary part folded into `(-pi, pi]`.
pub fn fold_principal(z: C64) -> C64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut im = z.im - two_pi * (z.im / two_pi).round();
    if im <= -PI {
        im += two_pi;
    } else if im > PI {
        im -= two_pi;
    }
    C64::new(z.re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_term() {
        let big = C64::new(1e16, -1e16);
        let s: CompensatedSum = [big, C64::new(1.0, 1.0), -big].into_iter().collect();
        assert_eq!(s.value(), C64::new(1.0, 1.0));
        assert!((s.cancellation_ratio() - 1e16).abs() / 1e16 < 1e-12);
    }

    #[test]
    fn fold_lands_in_principal_strip() {
        use std::f64::consts::PI;
        for k in -5..=5 {
            let z = fold_principal(C64::new(0.5, 0.3 + 2.0 * PI * k as f64));
            assert!((z.im - 0.3).abs() < 1e-12);
        }
        assert!((fold_principal(C64::new(0.0, -PI)).im - PI).abs() < 1e-15);
    }

    #[test]
    fn separation_guard() {
        assert!(ensure_separated(C64::new(1e-9, 0.0), 1e-6, || "x".into()).is_err());
        assert!(ensure_separated(C64::new(0.1, 0.0), 1e-6, || "x".into()).is_ok());
        // sinh vanishes at i*pi too
        assert!(ensure_separated(C64::new(0.0, std::f64::consts::PI), 1e-6, || "x".into()).is_err());
    }
}
