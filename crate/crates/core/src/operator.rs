//! Complex operators on finite Hilbert spaces with explicit basis metadata.
//!
//! Two bases are used throughout the crate:
//!
//! * the Dicke manifold of fixed total spin `J`, ordered by ascending `M`
//!   (index `k` holds `|J, M = -J + k⟩`);
//! * the tensor-product space of `N` spin-1/2 emitters, ordered
//!   lexicographically with site 0 the most significant bit, `↓ = 0`, `↑ = 1`.
//!
//! In both bases the fully polarized state `|↓…↓⟩` sits at index 0.
//!
//! Density matrices are vectorized by column stacking, so that
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`. Every superoperator in the crate uses
//! this convention.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::state::{DensityMatrix, StateRef};

/// Tolerance used when a Hermitian hint is verified on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the imaginary part of Hermitian expectation values.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Fixed-`J` manifold of `emitters` spins; `twice_j = 2J`.
    Dicke { emitters: usize, twice_j: usize },
    /// Full `2^emitters` tensor-product space.
    TensorProduct { emitters: usize },
}

#[derive(Clone, Debug)]
pub struct HilbertBasis {
    kind: BasisKind,
    labels: Vec<String>,
}

impl HilbertBasis {
    /// Dicke manifold with `2J = twice_j`; requires `twice_j ≤ N` and
    /// `twice_j ≡ N (mod 2)`.
    pub fn dicke(emitters: usize, twice_j: usize) -> Result<Self> {
        if emitters == 0 || twice_j > emitters || (emitters - twice_j) & 1 == 1 {
            return Err(Error::InvalidSpinLength { emitters, twice_j });
        }
        let labels = (0..=twice_j)
            .map(|k| format_half_integer(2 * k as i64 - twice_j as i64))
            .collect();
        Ok(Self {
            kind: BasisKind::Dicke { emitters, twice_j },
            labels,
        })
    }

    /// The maximal (`J = N/2`) Dicke manifold.
    pub fn dicke_symmetric(emitters: usize) -> Result<Self> {
        Self::dicke(emitters, emitters)
    }

    pub fn tensor(emitters: usize) -> Result<Self> {
        if emitters == 0 || emitters > 20 {
            return Err(Error::EmitterCountOutOfRange {
                emitters,
                min: 1,
                max: 20,
            });
        }
        let dim = 1usize << emitters;
        let labels = (0..dim)
            .map(|b| {
                (0..emitters)
                    .map(|site| {
                        if bit_of(b, site, emitters) {
                            '↑'
                        } else {
                            '↓'
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            kind: BasisKind::TensorProduct { emitters },
            labels,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn emitters(&self) -> usize {
        match self.kind {
            BasisKind::Dicke { emitters, .. } | BasisKind::TensorProduct { emitters } => emitters,
        }
    }

    /// Index of `|↓…↓⟩` (`M = -J` in a Dicke manifold).
    pub fn ground_index(&self) -> usize {
        0
    }

    pub fn is_dicke(&self) -> bool {
        matches!(self.kind, BasisKind::Dicke { .. })
    }

    /// Number of raised spins in basis state `index`, i.e. `M + J`.
    pub fn excitations(&self, index: usize) -> usize {
        match self.kind {
            BasisKind::Dicke { .. } => index,
            BasisKind::TensorProduct { .. } => index.count_ones() as usize,
        }
    }
}

impl PartialEq for HilbertBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for HilbertBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BasisKind::Dicke { emitters, twice_j } => {
                write!(
                    f,
                    "Dicke(N={emitters}, J={})",
                    format_half_integer(twice_j as i64)
                )
            }
            BasisKind::TensorProduct { emitters } => write!(f, "Tensor(N={emitters})"),
        }
    }
}

/// `true` if `site` is spin-up in tensor-product basis state `index`.
#[inline]
pub fn bit_of(index: usize, site: usize, emitters: usize) -> bool {
    (index >> (emitters - 1 - site)) & 1 == 1
}

fn format_half_integer(twice: i64) -> String {
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

/// Chooses between dense and sparse storage by dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoragePolicy {
    /// Operators with at least this dimension are stored sparse.
    pub sparse_from_dim: usize,
}

impl Default for StoragePolicy {
    fn default() -> Self {
        Self {
            sparse_from_dim: 64,
        }
    }
}

impl StoragePolicy {
    pub fn prefers_sparse(&self, dim: usize) -> bool {
        dim >= self.sparse_from_dim
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix<C64>),
}

/// A square complex matrix tied to a [`HilbertBasis`].
#[derive(Clone, Debug)]
pub struct Operator {
    basis: Arc<HilbertBasis>,
    repr: Repr,
    hermitian: bool,
}

impl Operator {
    pub fn from_dense(basis: Arc<HilbertBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::from_dense_with_policy(basis, matrix, StoragePolicy::default())
    }

    pub fn from_dense_with_policy(
        basis: Arc<HilbertBasis>,
        matrix: DMatrix<C64>,
        policy: StoragePolicy,
    ) -> Result<Self> {
        check_shape(&basis, matrix.nrows(), matrix.ncols())?;
        let repr = if policy.prefers_sparse(basis.dimension()) {
            Repr::Sparse(linalg::dense_to_csr(&matrix))
        } else {
            Repr::Dense(matrix)
        };
        Ok(Self {
            basis,
            repr,
            hermitian: false,
        })
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(
        basis: Arc<HilbertBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        Self::from_triplets_with_policy(basis, triplets, StoragePolicy::default())
    }

    pub fn from_triplets_with_policy(
        basis: Arc<HilbertBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
        policy: StoragePolicy,
    ) -> Result<Self> {
        let dim = basis.dimension();
        let mut entries = Vec::new();
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    rows: i + 1,
                    cols: j + 1,
                    dim,
                });
            }
            entries.push((i, j, v));
        }
        let csr = linalg::csr_from_triplets(dim, dim, entries);
        let repr = if policy.prefers_sparse(dim) {
            Repr::Sparse(csr)
        } else {
            Repr::Dense(linalg::csr_to_dense(&csr))
        };
        Ok(Self {
            basis,
            repr,
            hermitian: false,
        })
    }

    /// Builds an operator flagged Hermitian; fails if `‖A − A†‖_max ≥ 1e-12`.
    pub fn hermitian(basis: Arc<HilbertBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::from_dense(basis, matrix)?.into_hermitian()
    }

    pub fn zeros(basis: Arc<HilbertBasis>) -> Self {
        let dim = basis.dimension();
        let repr = if StoragePolicy::default().prefers_sparse(dim) {
            Repr::Sparse(CsrMatrix::zeros(dim, dim))
        } else {
            Repr::Dense(DMatrix::zeros(dim, dim))
        };
        Self {
            basis,
            repr,
            hermitian: true,
        }
    }

    pub fn identity(basis: Arc<HilbertBasis>) -> Self {
        let dim = basis.dimension();
        let mut op = Self::from_triplets(basis, (0..dim).map(|i| (i, i, linalg::ONE)))
            .expect("identity triplets are in range");
        op.hermitian = true;
        op
    }

    /// Verifies Hermiticity and sets the hint.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation >= HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Re-stores the matrix according to `policy`.
    pub fn with_policy(self, policy: StoragePolicy) -> Self {
        let sparse = policy.prefers_sparse(self.dimension());
        let repr = match (self.repr, sparse) {
            (Repr::Dense(d), true) => Repr::Sparse(linalg::dense_to_csr(&d)),
            (Repr::Sparse(s), false) => Repr::Dense(linalg::csr_to_dense(&s)),
            (r, _) => r,
        };
        Self { repr, ..self }
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.repr {
            Repr::Dense(d) => d.iter().filter(|z| **z != ZERO).count(),
            Repr::Sparse(s) => s.nnz(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(d) => d.clone(),
            Repr::Sparse(s) => linalg::csr_to_dense(s),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix<C64> {
        match &self.repr {
            Repr::Dense(d) => linalg::dense_to_csr(d),
            Repr::Sparse(s) => s.clone(),
        }
    }

    /// Non-zero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.repr {
            Repr::Dense(d) => {
                let n = d.nrows();
                let mut out = Vec::new();
                for j in 0..n {
                    for i in 0..n {
                        let v = d[(i, j)];
                        if v != ZERO {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            Repr::Sparse(s) => s.triplet_iter().map(|(i, j, v)| (i, j, *v)).collect(),
        }
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        match &self.repr {
            Repr::Dense(d) => d[(row, col)],
            Repr::Sparse(s) => s
                .get_entry(row, col)
                .map(|e| e.into_value())
                .unwrap_or(ZERO),
        }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        match &self.repr {
            Repr::Dense(d) => linalg::hermitian_deviation(d),
            Repr::Sparse(s) => {
                let adj = linalg::csr_adjoint(s);
                let diff = s - &adj;
                diff.values().iter().fold(0.0, |acc, z| acc.max(z.norm()))
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(d) => Repr::Dense(d.adjoint()),
            Repr::Sparse(s) => Repr::Sparse(linalg::csr_adjoint(s)),
        };
        Self {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        let repr = match &self.repr {
            Repr::Dense(d) => Repr::Dense(d * factor),
            Repr::Sparse(s) => {
                let mut s = s.clone();
                for v in s.values_mut() {
                    *v *= factor;
                }
                Repr::Sparse(s)
            }
        };
        Self {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(
            x.len(),
            self.dimension(),
            "vector length does not match operator"
        );
        match &self.repr {
            Repr::Dense(d) => d * x,
            Repr::Sparse(s) => linalg::csr_matvec(s, x),
        }
    }

    /// `self · m` for a dense matrix `m`.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(d) => d * m,
            Repr::Sparse(s) => linalg::csr_mul_dense(s, m),
        }
    }

    /// `m · self` for a dense matrix `m`.
    pub fn dense_mul(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(d) => m * d,
            Repr::Sparse(s) => linalg::dense_mul_csr(m, s),
        }
    }

    fn check_same_basis(&self, other: &Operator) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.basis.to_string(),
                right: other.basis.to_string(),
            })
        }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_basis(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a + b),
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a + b),
            (Repr::Dense(a), Repr::Sparse(b)) | (Repr::Sparse(b), Repr::Dense(a)) => {
                Repr::Dense(a + linalg::csr_to_dense(b))
            }
        };
        Ok(Self {
            basis: self.basis.clone(),
            repr,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.try_add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_basis(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a * b),
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a * b),
            (Repr::Dense(a), Repr::Sparse(b)) => Repr::Dense(linalg::dense_mul_csr(a, b)),
            (Repr::Sparse(a), Repr::Dense(b)) => Repr::Dense(linalg::csr_mul_dense(a, b)),
        };
        Ok(Self {
            basis: self.basis.clone(),
            repr,
            hermitian: false,
        })
    }

    /// Largest entrywise difference between two operators on the same basis.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        let d = self.try_sub(other)?;
        Ok(match &d.repr {
            Repr::Dense(m) => linalg::max_abs(m),
            Repr::Sparse(s) => s.values().iter().fold(0.0, |acc, z| acc.max(z.norm())),
        })
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => linalg::max_abs(m),
            Repr::Sparse(s) => s.values().iter().fold(0.0, |acc, z| acc.max(z.norm())),
        }
    }

    /// `⟨a| self |b⟩`.
    pub fn matrix_element(&self, bra: &DVector<C64>, ket: &DVector<C64>) -> C64 {
        bra.dotc(&self.matvec(ket))
    }

    /// `Tr(self · m)` for a dense matrix `m`.
    pub fn trace_product(&self, m: &DMatrix<C64>) -> C64 {
        match &self.repr {
            Repr::Dense(d) => {
                let n = d.nrows();
                let mut acc = ZERO;
                for i in 0..n {
                    for k in 0..n {
                        acc += d[(i, k)] * m[(k, i)];
                    }
                }
                acc
            }
            Repr::Sparse(s) => s.triplet_iter().map(|(i, k, v)| v * m[(k, i)]).sum(),
        }
    }
}

fn check_shape(basis: &HilbertBasis, rows: usize, cols: usize) -> Result<()> {
    let dim = basis.dimension();
    if rows != dim || cols != dim {
        return Err(Error::DimensionMismatch { rows, cols, dim });
    }
    Ok(())
}

// Operator arithmetic panics on basis mismatch; use the `try_*` methods when
// the bases are not known to agree.
impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator addition")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator subtraction")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator product")
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl Mul<&Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// `ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}

/// `Tr(op ρ)` or `⟨ψ|op|ψ⟩`.
///
/// For operators carrying the Hermitian hint the imaginary part must stay
/// below `1e-10`; otherwise an error is returned.
pub fn expectation<'a>(op: &Operator, state: impl Into<StateRef<'a>>) -> Result<C64> {
    let state = state.into();
    let basis = state.basis();
    if **basis != *op.basis {
        return Err(Error::BasisMismatch {
            left: op.basis.to_string(),
            right: basis.to_string(),
        });
    }
    let value = match state {
        StateRef::Pure(psi) => {
            let deviation = (psi.amplitudes().norm() - 1.0).abs();
            if deviation > crate::state::NORM_TOL {
                return Err(Error::NotNormalized { deviation });
            }
            op.matrix_element(psi.amplitudes(), psi.amplitudes())
        }
        StateRef::Mixed(rho) => {
            let deviation = rho.diagnostics().trace_dev;
            if deviation > crate::state::TRACE_TOL {
                return Err(Error::NotNormalized { deviation });
            }
            op.trace_product(rho.matrix())
        }
    };
    if op.hermitian && value.im.abs() > EXPECTATION_IMAG_TOL {
        return Err(Error::ComplexExpectation { imag: value.im });
    }
    Ok(value)
}

/// Column-stacking vectorization of a density matrix.
pub fn vectorize(rho: &DensityMatrix) -> DVector<C64> {
    vectorize_matrix(rho.matrix())
}

pub fn vectorize_matrix(m: &DMatrix<C64>) -> DVector<C64> {
    // nalgebra stores matrices column-major, which is exactly column stacking
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize_matrix`]; fails if the length is not a perfect square.
pub fn devectorize_matrix(v: &DVector<C64>) -> Result<DMatrix<C64>> {
    let len = v.len();
    let side = (len as f64).sqrt().round() as usize;
    if side * side != len {
        return Err(Error::NotSquareLength { len });
    }
    Ok(DMatrix::from_column_slice(side, side, v.as_slice()))
}

/// Inverse of [`vectorize`], validating the result as a density matrix on `basis`.
pub fn devectorize(basis: Arc<HilbertBasis>, v: &DVector<C64>) -> Result<DensityMatrix> {
    DensityMatrix::new(basis, devectorize_matrix(v)?)
}
