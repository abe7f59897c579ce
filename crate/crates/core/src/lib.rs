//! Scalar products of Bethe vectors for the inhomogeneous six-vertex model
//! with twisted boundaries.
//!
//! The crate builds the monodromy matrix, evaluates scalar products
//! `<0| C(λC_1)…C(λC_n) B(λB_1)…B(λB_n) |0>` by brute force, checks the
//! functional equations they satisfy and evaluates the multiple-contour
//! integral representation, both off-shell and on-shell.

#![allow(clippy::manual_is_multiple_of)]

pub mod bethe;
pub mod contour;
pub mod error;
pub mod funceq;
pub mod monodromy;
pub mod numeric;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod weights;

pub use error::{Error, Result};
pub use monodromy::{
    apply_entry, build_monodromy, build_monodromy_direct, build_site_matrices, vacuum, Entry,
    ModelParams, Monodromy, QuantumOperator, SiteMatrices, StateVector,
};
pub use oracle::{
    scalar_product_direct, DirectOracle, ScalarProductEvaluator, Side, SpectralSets, Variable,
};
pub use num_complex::Complex64 as C64;
pub use weights::{build_r_matrix, q_factorial, Anisotropy, RMatrix};
