//! Small dense/sparse helpers shared by the operator and solver layers.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest modulus over any sequence of entries.
pub fn max_modulus<'a>(values: impl IntoIterator<Item = &'a C64>) -> f64 {
    values.into_iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A - A†|` over all entries.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn csr_from_triplets(
    nrows: usize,
    ncols: usize,
    triplets: impl IntoIterator<Item = (usize, usize, C64)>,
) -> CsrMatrix<C64> {
    let mut coo = CooMatrix::new(nrows, ncols);
    for (i, j, v) in triplets {
        if v != ZERO {
            coo.push(i, j, v);
        }
    }
    CsrMatrix::from(&coo)
}

pub fn csr_to_dense(m: &CsrMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        out[(i, j)] += *v;
    }
    out
}

pub fn dense_to_csr(m: &DMatrix<C64>) -> CsrMatrix<C64> {
    let (r, c) = m.shape();
    csr_from_triplets(
        r,
        c,
        (0..c)
            .flat_map(|j| (0..r).map(move |i| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)])),
    )
}

pub fn csr_adjoint(m: &CsrMatrix<C64>) -> CsrMatrix<C64> {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

pub fn csr_scale(m: &CsrMatrix<C64>, factor: C64) -> CsrMatrix<C64> {
    let mut out = m.clone();
    for v in out.values_mut() {
        *v *= factor;
    }
    out
}

pub fn csr_matvec(m: &CsrMatrix<C64>, x: &DVector<C64>) -> DVector<C64> {
    let mut y = DVector::zeros(m.nrows());
    for (i, row) in m.row_iter().enumerate() {
        let mut acc = ZERO;
        for (&j, v) in row.col_indices().iter().zip(row.values()) {
            acc += v * x[j];
        }
        y[i] = acc;
    }
    y
}

/// Dense matrix times sparse matrix, `d · s`.
pub fn dense_mul_csr(d: &DMatrix<C64>, s: &CsrMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d.nrows(), s.ncols());
    for (k, row) in s.row_iter().enumerate() {
        for (&j, v) in row.col_indices().iter().zip(row.values()) {
            let src = d.column(k);
            let mut dst = out.column_mut(j);
            dst.axpy(*v, &src, ONE);
        }
    }
    out
}

/// Sparse matrix times dense matrix, `s · d`.
pub fn csr_mul_dense(s: &CsrMatrix<C64>, d: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(s.nrows(), d.ncols());
    for (i, row) in s.row_iter().enumerate() {
        for (&k, v) in row.col_indices().iter().zip(row.values()) {
            for c in 0..d.ncols() {
                out[(i, c)] += v * d[(k, c)];
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending with
/// matching eigenvector columns.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    // symmetrize first so round-off in the input cannot leak into the solver
    let mut sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    // entries spanning hundreds of decades can break the QR sweeps
    let floor = 1e-30 * max_abs(&sym);
    sym.apply(|z| {
        if z.norm() < floor {
            *z = ZERO;
        }
    });
    let eig = nalgebra::SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::LinearAlgebra("Hermitian eigensolver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearAlgebra(
            "Hermitian eigensolver produced non-finite values".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

pub fn to_faer(m: &DMatrix<C64>) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn from_faer(m: faer::MatRef<'_, C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
