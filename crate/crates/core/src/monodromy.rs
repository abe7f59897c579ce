//! Monodromy matrix of the inhomogeneous six-vertex model on `L` sites.
//!
//! The quantum space is `V_1 ⊗ … ⊗ V_L` with site 1 as the most significant
//! bit of a basis index; bit value 0 is spin up. The monodromy matrix is the
//! ordered product `R_a1(λ-μ_1) … R_aL(λ-μ_L)` and its auxiliary-space
//! blocks are the operators `A, B, C, D`.
//!
//! Three constructions are provided and cross-checked in tests:
//! * [`build_monodromy`]: the site-by-site recursion
//!   `A_{L+1} = A_L α + B_L γ`, `B_{L+1} = A_L β + B_L δ`, … (Kronecker products);
//! * [`build_monodromy_direct`]: the dense ordered product on `V_a ⊗ V_1 ⊗ … ⊗ V_L`;
//! * [`apply_entry`]: matrix-free application in `O(L 2^L)`, used by the
//!   scalar-product oracle.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::ensure_separated;
use crate::weights::Anisotropy;

/// Default genericity floor `δ_sep` on `|sinh(difference)|`.
pub const DEFAULT_SEP_FLOOR: f64 = 1e-6;

/// Largest lattice for which dense operators are built.
pub const MAX_DENSE_SITES: usize = 10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Lattice length, anisotropy, inhomogeneities and twists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    aniso: Anisotropy,
    mu: Vec<C64>,
    phi1: C64,
    phi2: C64,
    sep_floor: f64,
}

impl ModelParams {
    /// Validates with the default genericity floor.
    pub fn new(gamma: C64, mu: Vec<C64>, phi1: C64, phi2: C64) -> Result<Self> {
        Self::with_sep_floor(gamma, mu, phi1, phi2, DEFAULT_SEP_FLOOR)
    }

    /// Validates with a custom floor. A floor of `0.0` admits homogeneous
    /// chains (coinciding `μ_j`); routines that divide by `a(μ_1 - μ_k)` or
    /// `b(μ_1 - μ_k)` still guard their own denominators.
    pub fn with_sep_floor(
        gamma: C64,
        mu: Vec<C64>,
        phi1: C64,
        phi2: C64,
        sep_floor: f64,
    ) -> Result<Self> {
        let aniso = Anisotropy::new(gamma)?;
        if mu.is_empty() {
            return Err(Error::InvalidInput("lattice length L must be at least 1".into()));
        }
        if !(sep_floor >= 0.0 && sep_floor.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid separation floor {sep_floor}")));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !mu.iter().all(finite) || !finite(&phi1) || !finite(&phi2) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if phi1 == ZERO {
            return Err(Error::InvalidInput("twist phi1 must be nonzero".into()));
        }
        if sep_floor > 0.0 {
            for i in 0..mu.len() {
                for j in (i + 1)..mu.len() {
                    ensure_separated(mu[i] - mu[j], sep_floor, || {
                        format!("mu_{} - mu_{}", i + 1, j + 1)
                    })?;
                }
            }
        }
        Ok(Self {
            aniso,
            mu,
            phi1,
            phi2,
            sep_floor,
        })
    }

    /// Number of lattice sites `L`.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn aniso(&self) -> &Anisotropy {
        &self.aniso
    }

    pub fn gamma(&self) -> C64 {
        self.aniso.gamma()
    }

    pub fn mu(&self) -> &[C64] {
        &self.mu
    }

    pub fn phi1(&self) -> C64 {
        self.phi1
    }

    pub fn phi2(&self) -> C64 {
        self.phi2
    }

    pub fn sep_floor(&self) -> f64 {
        self.sep_floor
    }

    /// Hilbert-space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1usize << self.len()
    }

    /// The same model with the first site removed (`L → L-1`, `μ_i → μ_{i+1}`).
    pub fn without_first_site(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InvalidInput("cannot drop a site from a one-site lattice".into()));
        }
        Ok(Self {
            mu: self.mu[1..].to_vec(),
            ..self.clone()
        })
    }

    /// Copy with different twists.
    pub fn with_twists(&self, phi1: C64, phi2: C64) -> Result<Self> {
        Self::with_sep_floor(self.gamma(), self.mu.clone(), phi1, phi2, self.sep_floor)
    }

    #[inline]
    pub fn a(&self, lambda: C64) -> C64 {
        self.aniso.a(lambda)
    }

    #[inline]
    pub fn b(&self, lambda: C64) -> C64 {
        self.aniso.b(lambda)
    }

    #[inline]
    pub fn c(&self) -> C64 {
        self.aniso.c()
    }

    /// `∏_j a(λ - μ_j)`.
    pub fn prod_a(&self, lambda: C64) -> C64 {
        self.mu.iter().map(|&m| self.a(lambda - m)).product()
    }

    /// `∏_j b(λ - μ_j)`.
    pub fn prod_b(&self, lambda: C64) -> C64 {
        self.mu.iter().map(|&m| self.b(lambda - m)).product()
    }

    /// Floor used by guards on spectral differences; positive even for
    /// homogeneous chains.
    pub fn guard_floor(&self) -> f64 {
        if self.sep_floor > 0.0 {
            self.sep_floor
        } else {
            1e-12
        }
    }

    pub(crate) fn ensure_dense(&self) -> Result<()> {
        if self.len() > MAX_DENSE_SITES {
            return Err(Error::InvalidInput(format!(
                "dense operators are limited to L <= {MAX_DENSE_SITES}, got {}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// A linear operator on the `2^L`-dimensional quantum space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperator(DMatrix<C64>);

impl QuantumOperator {
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "quantum operators are square");
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::from_element(dim, dim, ZERO))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let out = &self.0 * nalgebra::DVector::from_column_slice(v.as_slice());
        StateVector(out.as_slice().to_vec())
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &QuantumOperator) -> QuantumOperator {
        QuantumOperator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest entry (in magnitude) outside the block that changes the
    /// number of down spins by exactly `shift`.
    pub fn magnon_block_violation(&self, shift: i32) -> f64 {
        let mut worst = 0.0f64;
        for (col, column) in self.0.column_iter().enumerate() {
            for (row, z) in column.iter().enumerate() {
                let dk = row.count_ones() as i32 - col.count_ones() as i32;
                if dk != shift {
                    worst = worst.max(z.norm());
                }
            }
        }
        worst
    }
}

impl std::ops::Mul<&QuantumOperator> for &QuantumOperator {
    type Output = QuantumOperator;

    fn mul(self, rhs: &QuantumOperator) -> QuantumOperator {
        QuantumOperator(&self.0 * &rhs.0)
    }
}

/// A vector in the quantum space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn from_vec(v: Vec<C64>) -> Self {
        Self(v)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bilinear pairing `Σ u_i v_i` (no conjugation).
    pub fn pair(&self, other: &StateVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

/// All spins up: `(1, 0)^{⊗ L}`.
pub fn vacuum(sites: usize) -> StateVector {
    assert!(sites >= 1, "vacuum needs at least one site");
    let mut v = vec![ZERO; 1 << sites];
    v[0] = ONE;
    StateVector(v)
}

/// The 2×2 site operators of `R_aj = [[α, β], [γ, δ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteMatrices {
    pub alpha: Matrix2<C64>,
    pub beta: Matrix2<C64>,
    pub gamma: Matrix2<C64>,
    pub delta: Matrix2<C64>,
}

/// `α = diag(a, b)`, `β = [[0,0],[c,0]]`, `γ = [[0,c],[0,0]]`, `δ = diag(b, a)` at `λ`.
pub fn build_site_matrices(lambda: C64, aniso: &Anisotropy) -> SiteMatrices {
    let (a, b, c) = (aniso.a(lambda), aniso.b(lambda), aniso.c());
    SiteMatrices {
        alpha: Matrix2::new(a, ZERO, ZERO, b),
        beta: Matrix2::new(ZERO, ZERO, c, ZERO),
        gamma: Matrix2::new(ZERO, c, ZERO, ZERO),
        delta: Matrix2::new(b, ZERO, ZERO, a),
    }
}

/// Entry of the monodromy matrix in the auxiliary space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Entry {
    A,
    B,
    C,
    D,
}

impl Entry {
    /// (row, column) in the auxiliary space.
    fn aux_index(self) -> (usize, usize) {
        match self {
            Entry::A => (0, 0),
            Entry::B => (0, 1),
            Entry::C => (1, 0),
            Entry::D => (1, 1),
        }
    }
}

/// The four monodromy operators at one spectral parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    pub a: QuantumOperator,
    pub b: QuantumOperator,
    pub c: QuantumOperator,
    pub d: QuantumOperator,
}

impl Monodromy {
    pub fn get(&self, entry: Entry) -> &QuantumOperator {
        match entry {
            Entry::A => &self.a,
            Entry::B => &self.b,
            Entry::C => &self.c,
            Entry::D => &self.d,
        }
    }

    /// Largest entrywise deviation relative to the largest entry of `self`.
    pub fn relative_deviation(&self, other: &Monodromy) -> f64 {
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for e in [Entry::A, Entry::B, Entry::C, Entry::D] {
            let (x, y) = (self.get(e).matrix(), other.get(e).matrix());
            for (p, q) in x.iter().zip(y.iter()) {
                diff = diff.max((p - q).norm());
                scale = scale.max(p.norm());
            }
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

fn kron2(m: &DMatrix<C64>, s: &Matrix2<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let mut out = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for j in 0..n {
        for i in 0..n {
            let x = m[(i, j)];
            if x == ZERO {
                continue;
            }
            for sj in 0..2 {
                for si in 0..2 {
                    out[(2 * i + si, 2 * j + sj)] = x * s[(si, sj)];
                }
            }
        }
    }
    out
}

/// Monodromy operators by the site recursion, starting from
/// `A_1 = α_1(λ-μ_1)`, `B_1 = β_1`, `C_1 = γ_1`, `D_1 = δ_1(λ-μ_1)`.
pub fn build_monodromy(lambda: C64, params: &ModelParams) -> Monodromy {
    assert!(
        params.len() <= MAX_DENSE_SITES,
        "dense monodromy is limited to L <= {MAX_DENSE_SITES}"
    );
    let site = |j: usize| build_site_matrices(lambda - params.mu()[j], params.aniso());
    let to_d = |m: &Matrix2<C64>| DMatrix::from_iterator(2, 2, m.iter().copied());
    let s1 = site(0);
    let (mut a, mut b, mut c, mut d) = (to_d(&s1.alpha), to_d(&s1.beta), to_d(&s1.gamma), to_d(&s1.delta));
    for j in 1..params.len() {
        let s = site(j);
        let a_next = kron2(&a, &s.alpha) + kron2(&b, &s.gamma);
        let b_next = kron2(&a, &s.beta) + kron2(&b, &s.delta);
        let c_next = kron2(&c, &s.alpha) + kron2(&d, &s.gamma);
        let d_next = kron2(&c, &s.beta) + kron2(&d, &s.delta);
        a = a_next;
        b = b_next;
        c = c_next;
        d = d_next;
    }
    Monodromy {
        a: QuantumOperator(a),
        b: QuantumOperator(b),
        c: QuantumOperator(c),
        d: QuantumOperator(d),
    }
}

/// `R_aj(λ)` as a dense matrix on `V_a ⊗ V_1 ⊗ … ⊗ V_L`.
fn embedded_r(lambda: C64, site: usize, sites: usize, aniso: &Anisotropy) -> DMatrix<C64> {
    let r = crate::weights::build_r_matrix(lambda, aniso);
    let r = r.entries();
    let dim = 1usize << sites;
    let shift = sites - 1 - site;
    let mask = 1usize << shift;
    let mut out = DMatrix::from_element(2 * dim, 2 * dim, ZERO);
    for col in 0..2 * dim {
        let (ac, qc) = (col / dim, col % dim);
        let sc = (qc >> shift) & 1;
        for ar in 0..2 {
            for sr in 0..2 {
                let v = r[(2 * ar + sr, 2 * ac + sc)];
                if v == ZERO {
                    continue;
                }
                let qr = (qc & !mask) | (sr << shift);
                out[(ar * dim + qr, col)] = v;
            }
        }
    }
    out
}

/// Monodromy operators from the dense ordered product of R-matrices.
pub fn build_monodromy_direct(lambda: C64, params: &ModelParams) -> Monodromy {
    assert!(params.len() <= 8, "direct dense product is limited to L <= 8");
    let sites = params.len();
    let dim = params.dim();
    let mut t = DMatrix::<C64>::identity(2 * dim, 2 * dim);
    for j in 0..sites {
        t *= embedded_r(lambda - params.mu()[j], j, sites, params.aniso());
    }
    let block = |r: usize, c: usize| QuantumOperator(t.view((r * dim, c * dim), (dim, dim)).into_owned());
    Monodromy {
        a: block(0, 0),
        b: block(0, 1),
        c: block(1, 0),
        d: block(1, 1),
    }
}

/// Applies one monodromy entry to `v` without forming any matrix.
///
/// The auxiliary state `|col> ⊗ v` is propagated through `R_aL, …, R_a1`
/// (the rightmost factor acts first) and projected onto `<row|`.
pub fn apply_entry(entry: Entry, lambda: C64, params: &ModelParams, v: &[C64]) -> Vec<C64> {
    let sites = params.len();
    assert_eq!(v.len(), 1 << sites, "state dimension must be 2^L");
    let (row, col) = entry.aux_index();
    let zeros = vec![ZERO; v.len()];
    let (mut u0, mut u1) = if col == 0 {
        (v.to_vec(), zeros)
    } else {
        (zeros, v.to_vec())
    };
    let c = params.c();
    for j in (0..sites).rev() {
        let x = lambda - params.mu()[j];
        let (a, b) = (params.a(x), params.b(x));
        let mask = 1usize << (sites - 1 - j);
        let mut n0 = vec![ZERO; v.len()];
        let mut n1 = vec![ZERO; v.len()];
        for idx in 0..v.len() {
            if idx & mask == 0 {
                // site spin up: α -> a, δ -> b, γ raises the spin-down part
                n0[idx] = a * u0[idx];
                n1[idx] = c * u0[idx | mask] + b * u1[idx];
            } else {
                // site spin down: α -> b, δ -> a, β lowers the spin-up part
                n0[idx] = b * u0[idx] + c * u1[idx & !mask];
                n1[idx] = a * u1[idx];
            }
        }
        u0 = n0;
        u1 = n1;
    }
    if row == 0 {
        u0
    } else {
        u1
    }
}

/// `φ_1 A(λ) + φ_2 D(λ)`.
pub fn transfer_matrix(lambda: C64, params: &ModelParams) -> QuantumOperator {
    let m = build_monodromy(lambda, params);
    QuantumOperator(m.a.0 * params.phi1() + m.d.0 * params.phi2())
}

/// Residuals of the pseudo-vacuum actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VacuumResiduals {
    /// `A|0> = ∏a |0>`.
    pub a: f64,
    /// `D|0> = ∏b |0>`.
    pub d: f64,
    /// `C|0> = 0`.
    pub c: f64,
    /// `<0|B = 0`.
    pub b_dual: f64,
    /// `<0|A = ∏a <0|`.
    pub a_dual: f64,
    /// `<0|D = ∏b <0|`.
    pub d_dual: f64,
}

impl VacuumResiduals {
    pub fn max(&self) -> f64 {
        [self.a, self.d, self.c, self.b_dual, self.a_dual, self.d_dual]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn eigen_residual(v: &[C64], eigenvalue: C64, scale_fallback: f64) -> f64 {
    let mut diff = 0.0;
    for (i, z) in v.iter().enumerate() {
        let expected = if i == 0 { eigenvalue } else { ZERO };
        diff += (z - expected).norm_sqr();
    }
    let scale = if eigenvalue.norm() > 0.0 {
        eigenvalue.norm()
    } else {
        scale_fallback
    };
    if scale == 0.0 {
        diff.sqrt()
    } else {
        diff.sqrt() / scale
    }
}

/// Vacuum eigenvalue and annihilation residuals at `λ`.
pub fn vacuum_action_residuals(lambda: C64, params: &ModelParams) -> VacuumResiduals {
    let m = build_monodromy(lambda, params);
    let (pa, pb) = (params.prod_a(lambda), params.prod_b(lambda));
    let col0 = |op: &QuantumOperator| op.matrix().column(0).iter().copied().collect::<Vec<_>>();
    let row0 = |op: &QuantumOperator| op.matrix().row(0).iter().copied().collect::<Vec<_>>();
    let annihilated = |v: Vec<C64>, op: &QuantumOperator| {
        let n = crate::numeric::norm2(&v);
        let s = op.frobenius();
        if s == 0.0 {
            n
        } else {
            n / s
        }
    };
    VacuumResiduals {
        a: eigen_residual(&col0(&m.a), pa, m.a.frobenius()),
        d: eigen_residual(&col0(&m.d), pb, m.d.frobenius()),
        c: annihilated(col0(&m.c), &m.c),
        b_dual: annihilated(row0(&m.b), &m.b),
        a_dual: eigen_residual(&row0(&m.a), pa, m.a.frobenius()),
        d_dual: eigen_residual(&row0(&m.d), pb, m.d.frobenius()),
    }
}

/// Relative residuals of the exchange relations between two spectral parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutationResiduals {
    pub bb: f64,
    pub cc: f64,
    pub ab: f64,
    pub ca: f64,
    pub db: f64,
    pub cd: f64,
}

impl CommutationResiduals {
    pub fn max(&self) -> f64 {
        [self.bb, self.cc, self.ab, self.ca, self.db, self.cd]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `‖lhs - Σ terms‖_F / max(‖lhs‖_F, ‖term‖_F)`.
fn relation_residual(lhs: &DMatrix<C64>, terms: &[DMatrix<C64>]) -> f64 {
    let fro = |m: &DMatrix<C64>| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut diff = lhs.clone();
    let mut scale = fro(lhs);
    for t in terms {
        diff -= t;
        scale = scale.max(fro(t));
    }
    if scale == 0.0 {
        fro(&diff)
    } else {
        fro(&diff) / scale
    }
}

/// Checks `[B,B] = [C,C] = 0` and the A-B, C-A, D-B and C-D exchange relations.
pub fn commutation_residuals(l1: C64, l2: C64, params: &ModelParams) -> Result<CommutationResiduals> {
    params.ensure_dense()?;
    ensure_separated(l2 - l1, params.guard_floor(), || "l2 - l1".to_string())?;
    let t1 = build_monodromy(l1, params);
    let t2 = build_monodromy(l2, params);
    let (a1, b1, c1, d1) = (t1.a.matrix(), t1.b.matrix(), t1.c.matrix(), t1.d.matrix());
    let (a2, b2, c2, d2) = (t2.a.matrix(), t2.b.matrix(), t2.c.matrix(), t2.d.matrix());
    let c = params.c();
    let f = |x: C64| (params.a(x) / params.b(x), c / params.b(x));
    let (ap21, cp21) = f(l2 - l1);
    let (ap12, cp12) = f(l1 - l2);

    let bb = relation_residual(&(b1 * b2), &[b2 * b1]);
    let cc = relation_residual(&(c1 * c2), &[c2 * c1]);
    let ab = relation_residual(&(a1 * b2), &[(b2 * a1) * ap21, (b1 * a2) * (-cp21)]);
    let ca = relation_residual(&(c1 * a2), &[(a2 * c1) * ap12, (a1 * c2) * (-cp12)]);
    let db = relation_residual(&(d1 * b2), &[(b2 * d1) * ap12, (b1 * d2) * (-cp12)]);
    let cd = relation_residual(&(c1 * d2), &[(d2 * c1) * ap21, (d1 * c2) * (-cp21)]);
    Ok(CommutationResiduals { bb, cc, ab, ca, db, cd })
}

/// Relative residual of `[T(l1), T(l2)] = 0` for the twisted transfer matrix.
pub fn transfer_commutator_residual(l1: C64, l2: C64, params: &ModelParams) -> f64 {
    let t1 = transfer_matrix(l1, params);
    let t2 = transfer_matrix(l2, params);
    let prod = (&t1 * &t2).frobenius();
    let comm = t1.commutator(&t2).frobenius();
    if prod == 0.0 {
        comm
    } else {
        comm / prod
    }
}

fn monodromy_dense(lambda: C64, params: &ModelParams) -> DMatrix<C64> {
    let m = build_monodromy(lambda, params);
    let dim = params.dim();
    let mut t = DMatrix::from_element(2 * dim, 2 * dim, ZERO);
    for (e, (r, c)) in [Entry::A, Entry::B, Entry::C, Entry::D]
        .into_iter()
        .map(|e| (e, e.aux_index()))
    {
        t.view_mut((r * dim, c * dim), (dim, dim)).copy_from(m.get(e).matrix());
    }
    t
}

/// Relative residual of `R12(l1-l2) T1(l1) T2(l2) = T2(l2) T1(l1) R12(l1-l2)`
/// on `V_1 ⊗ V_2 ⊗ (quantum space)`.
pub fn rtt_residual(l1: C64, l2: C64, params: &ModelParams) -> Result<f64> {
    if params.len() > 6 {
        return Err(Error::InvalidInput("RTT check is limited to L <= 6".into()));
    }
    let dim = params.dim();
    let t1 = monodromy_dense(l1, params);
    let t2 = monodromy_dense(l2, params);
    let r = crate::weights::build_r_matrix(l1 - l2, params.aniso());
    let big = 4 * dim;
    let idx = |x: usize, y: usize, q: usize| (2 * x + y) * dim + q;
    let mut big_t1 = DMatrix::from_element(big, big, ZERO);
    let mut big_t2 = DMatrix::from_element(big, big, ZERO);
    let mut big_r = DMatrix::from_element(big, big, ZERO);
    for x in 0..2 {
        for y in 0..2 {
            for xp in 0..2 {
                for yp in 0..2 {
                    let rv = r.entries()[(2 * x + y, 2 * xp + yp)];
                    for q in 0..dim {
                        if rv != ZERO {
                            big_r[(idx(x, y, q), idx(xp, yp, q))] = rv;
                        }
                        for p in 0..dim {
                            if y == yp {
                                big_t1[(idx(x, y, q), idx(xp, yp, p))] = t1[(x * dim + q, xp * dim + p)];
                            }
                            if x == xp {
                                big_t2[(idx(x, y, q), idx(xp, yp, p))] = t2[(y * dim + q, yp * dim + p)];
                            }
                        }
                    }
                }
            }
        }
    }
    let lhs = &big_r * &big_t1 * &big_t2;
    let rhs = &big_t2 * &big_t1 * &big_r;
    Ok(relation_residual(&lhs, &[rhs]))
}

/// Relative deviation of `B(Λ_0)` from its leading large-`x` form
/// `(q-q⁻¹)/2 · 2^{-(L-1)} · q^{(L-1)/2} x^{(L-1)/2} e^{-Σμ} Σ_k e^{μ_k} P_k⁻`,
/// with `P_k⁻ = K^{⊗(k-1)} ⊗ X⁻ ⊗ (K⁻¹)^{⊗(L-k)}` and `K = diag(q^{1/2}, q^{-1/2})`.
pub fn operator_leading_term_residual(params: &ModelParams, probe: f64) -> Result<f64> {
    params.ensure_dense()?;
    let sites = params.len();
    if (sites as f64 - 1.0) * probe >= 300.0 {
        return Err(Error::Overflow(format!(
            "(L-1)·Λ0 = {} must stay below 300",
            (sites as f64 - 1.0) * probe
        )));
    }
    let lambda = C64::new(probe, 0.0);
    let b = build_monodromy(lambda, params).b;
    let gamma = params.gamma();
    let q = gamma.exp();
    let sqrt_q = (gamma / 2.0).exp();
    let k_plus = Matrix2::new(sqrt_q, ZERO, ZERO, ONE / sqrt_q);
    let k_minus = Matrix2::new(ONE / sqrt_q, ZERO, ZERO, sqrt_q);
    let x_minus = Matrix2::new(ZERO, ZERO, ONE, ZERO);
    let half_l = (sites - 1) as f64;
    let coeff = (q - ONE / q) / 2.0
        * 2f64.powi(-(sites as i32 - 1))
        * (gamma * half_l / 2.0).exp()
        * (lambda * half_l).exp()
        * (-params.mu().iter().sum::<C64>()).exp();
    let mut predicted = DMatrix::from_element(params.dim(), params.dim(), ZERO);
    for k in 0..sites {
        let mut p = DMatrix::from_element(1, 1, ONE);
        for j in 0..sites {
            let s = match j.cmp(&k) {
                std::cmp::Ordering::Less => &k_plus,
                std::cmp::Ordering::Equal => &x_minus,
                std::cmp::Ordering::Greater => &k_minus,
            };
            p = kron2(&p, s);
        }
        predicted += p * (coeff * params.mu()[k].exp());
    }
    let diff = (b.matrix() - &predicted).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = predicted.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(diff / scale)
}

/// Checks that every entry of `x^{(L-1)/2} X(λ)` (X = B or C) is a polynomial
/// of degree at most `L-1` in `x = e^{2λ}`: interpolates through `L` nodes on
/// the unit circle and returns the relative error of the prediction at a
/// held-out node halfway between two sampling nodes.
pub fn operator_polynomial_residual(entry: Entry, params: &ModelParams) -> Result<f64> {
    params.ensure_dense()?;
    let sites = params.len();
    let deg1 = sites; // number of nodes = degree + 1
    let theta = |t: f64| std::f64::consts::TAU * t / deg1 as f64;
    let sample = |t: f64| -> (C64, DMatrix<C64>) {
        let lambda = C64::new(0.0, theta(t) / 2.0);
        let x = (lambda * 2.0).exp();
        let weight = (lambda * (sites as f64 - 1.0)).exp();
        let op = build_monodromy(lambda, params);
        (x, op.get(entry).matrix() * weight)
    };
    let samples: Vec<(C64, DMatrix<C64>)> = (0..deg1).map(|k| sample(k as f64)).collect();
    let (x_out, expected) = sample(0.5);
    let nodes: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let weights = crate::numeric::lagrange_weights(&nodes, x_out);
    let mut predicted = DMatrix::from_element(params.dim(), params.dim(), ZERO);
    for ((_, m), w) in samples.iter().zip(&weights) {
        predicted += m * *w;
    }
    let diff = (&predicted - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = expected.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params(l: usize) -> ModelParams {
        let mu = (0..l).map(|j| c(0.13 * j as f64 - 0.2, 0.07 * (j as f64) - 0.11 * (j * j) as f64 / 3.0)).collect();
        ModelParams::new(c(0.45, 0.2), mu, c(1.1, -0.3), c(0.7, 0.4)).unwrap()
    }

    #[test]
    fn site_matrices() {
        let aniso = Anisotropy::new(c(0.6, 0.1)).unwrap();
        let s = build_site_matrices(c(0.0, 0.0), &aniso);
        assert_eq!(s.alpha, Matrix2::new(aniso.c(), ZERO, ZERO, ZERO));
        let cc = aniso.c() * aniso.c();
        assert_eq!(s.beta * s.gamma, Matrix2::new(ZERO, ZERO, ZERO, cc));
        assert_eq!(s.gamma * s.beta, Matrix2::new(cc, ZERO, ZERO, ZERO));
        assert_eq!(s.beta * s.beta, Matrix2::zeros());
    }

    #[test]
    fn single_site_monodromy() {
        let p = params(1);
        let l = c(0.3, -0.8);
        let m = build_monodromy(l, &p);
        let s = build_site_matrices(l - p.mu()[0], p.aniso());
        assert_eq!(m.b.matrix().as_slice(), s.beta.as_slice());
        assert_eq!(m.c.matrix().as_slice(), s.gamma.as_slice());
        assert_eq!(m.a.matrix().as_slice(), s.alpha.as_slice());
        // B is constant for L = 1
        assert_eq!(build_monodromy(c(-2.0, 1.0), &p).b, m.b);
    }

    #[test]
    fn three_constructions_agree() {
        for l in 1..=5 {
            let p = params(l);
            for k in 0..4 {
                let lam = c(0.21 * k as f64 - 0.3, 0.5 - 0.17 * k as f64);
                let rec = build_monodromy(lam, &p);
                let dir = build_monodromy_direct(lam, &p);
                assert!(rec.relative_deviation(&dir) <= 1e-13, "L={l}");
                let v: Vec<C64> = (0..p.dim()).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
                for e in [Entry::A, Entry::B, Entry::C, Entry::D] {
                    let free = apply_entry(e, lam, &p, &v);
                    let dense = rec.get(e).apply(&StateVector::from_vec(v.clone()));
                    let diff = free.iter().zip(dense.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    let scale = crate::numeric::norm2(&free).max(1e-300);
                    assert!(diff / scale < 1e-13, "entry {e:?} L={l}");
                }
            }
        }
    }

    #[test]
    fn c_annihilates_vacuum_exactly() {
        for l in 1..=6 {
            let p = params(l);
            let v = apply_entry(Entry::C, c(0.4, 0.9), &p, vacuum(l).as_slice());
            assert!(v.iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn vacuum_vectors() {
        assert_eq!(vacuum(1).as_slice(), &[ONE, ZERO]);
        assert_eq!(vacuum(2).as_slice(), &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(vacuum(3).pair(&vacuum(3)), ONE);
    }

    #[test]
    fn d_eigenvalue_vanishes_at_inhomogeneity() {
        let p = params(1);
        let m = build_monodromy(p.mu()[0], &p);
        assert_eq!(m.d.matrix()[(0, 0)], ZERO);
    }

    #[test]
    fn transfer_with_trivial_twist_is_a() {
        let p = ModelParams::new(c(0.3, 0.1), vec![c(0.1, 0.0), c(-0.2, 0.3)], ONE, ZERO).unwrap();
        let l = c(0.2, 0.2);
        assert_eq!(transfer_matrix(l, &p), build_monodromy(l, &p).a);
    }

    #[test]
    fn magnon_blocks_are_exact() {
        let p = params(4);
        let m = build_monodromy(c(0.33, 0.1), &p);
        assert_eq!(m.b.magnon_block_violation(1), 0.0);
        assert_eq!(m.c.magnon_block_violation(-1), 0.0);
        assert_eq!(m.a.magnon_block_violation(0), 0.0);
        assert_eq!(m.d.magnon_block_violation(0), 0.0);
    }

    #[test]
    fn leading_term_single_site_is_exact() {
        let p = params(1);
        assert!(operator_leading_term_residual(&p, 9.0).unwrap() < 1e-15);
    }

    #[test]
    fn leading_term_scaling() {
        let p = params(3);
        let d10 = operator_leading_term_residual(&p, 10.0).unwrap();
        let d12 = operator_leading_term_residual(&p, 12.0).unwrap();
        assert!(d10 <= 1e-6, "{d10}");
        let ratio = d12 / d10;
        let expected = (-4.0f64).exp();
        assert!(ratio > expected / 3.0 && ratio < expected * 3.0, "{ratio}");
    }

    #[test]
    fn leading_term_overflow_guard() {
        let p = params(4);
        assert!(matches!(operator_leading_term_residual(&p, 120.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn exchange_relations() {
        for l in 1..=4 {
            let p = params(l);
            let r = commutation_residuals(c(0.31, 0.2), c(-0.4, 0.65), &p).unwrap();
            assert!(r.max() <= 1e-12, "L={l}: {r:?}");
        }
    }

    #[test]
    fn exchange_relation_guard() {
        let p = params(2);
        let l = c(0.3, 0.1);
        assert!(matches!(commutation_residuals(l, l, &p), Err(Error::Separation { .. })));
    }

    #[test]
    fn rtt_and_transfer_commute() {
        let p = params(3);
        let (l1, l2) = (c(0.2, -0.3), c(0.7, 0.45));
        assert!(rtt_residual(l1, l2, &p).unwrap() <= 1e-13);
        assert!(transfer_commutator_residual(l1, l2, &p) <= 1e-13);
    }

    #[test]
    fn vacuum_actions() {
        for l in 1..=5 {
            let r = vacuum_action_residuals(c(0.15, -0.6), &params(l));
            assert!(r.max() <= 1e-14, "{r:?}");
        }
    }

    #[test]
    fn creation_operators_are_laurent_polynomials() {
        for l in 1..=5 {
            let p = params(l);
            assert!(operator_polynomial_residual(Entry::B, &p).unwrap() <= 1e-12);
            assert!(operator_polynomial_residual(Entry::C, &p).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn homogeneous_chain_needs_zero_floor() {
        let mu = vec![ZERO, ZERO];
        assert!(ModelParams::new(c(0.3, 0.0), mu.clone(), ONE, ONE).is_err());
        assert!(ModelParams::with_sep_floor(c(0.3, 0.0), mu, ONE, ONE, 0.0).is_ok());
    }
}
