use thiserror::Error;

/// Errors raised while building models or evaluating scalar products.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Model or spectral-set input that violates a structural requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `sinh(gamma)` vanishes, which collapses `c` and every creation operator.
    #[error("degenerate anisotropy: |sinh(gamma)| = {magnitude:.3e} (gamma must not be a multiple of i*pi)")]
    DegenerateAnisotropy { magnitude: f64 },

    /// Two spectral values are closer than the genericity floor.
    #[error("genericity violated: |sinh({what})| = {value:.3e} < floor {floor:.3e}")]
    Separation { what: String, value: f64, floor: f64 },

    /// A denominator of a closed formula vanishes at the requested point.
    #[error("singular configuration: {factor} vanishes ({value:.3e})")]
    Singular { factor: String, value: f64 },

    /// Products would leave the representable floating point range.
    #[error("overflow guard: {0}")]
    Overflow(String),

    /// Bethe roots handed to an on-shell routine do not satisfy the Bethe equations.
    #[error("stale Bethe roots: residual {residual:.3e} exceeds {tolerance:.1e}")]
    StaleRoots { residual: f64, tolerance: f64 },
}

impl Error {
    /// `true` for numerical singularities (as opposed to malformed input).
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::Separation { .. } | Error::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
