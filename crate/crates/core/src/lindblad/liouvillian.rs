use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use super::LindbladModel;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ZERO};
use crate::operator::BasisKind;

/// Largest emitter count for a Liouvillian on the tensor-product space.
pub const MAX_LIOUVILLIAN_EMITTERS: usize = 8;
/// Largest Dicke-manifold dimension for which a Liouvillian is assembled.
pub const MAX_LIOUVILLIAN_DICKE_DIM: usize = 1024;

/// Sparse Liouvillian in the column-stacking convention:
/// `𝓛 = I⊗K + K̄⊗I + Σⱼ γⱼ L̄ⱼ⊗Lⱼ` with `K = −iH − ½Σⱼ γⱼ Lⱼ†Lⱼ`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    hilbert_dim: usize,
    matrix: CsrMatrix<C64>,
}

impl Liouvillian {
    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Side length `d²`.
    pub fn side(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn matrix(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        linalg::csr_matvec(&self.matrix, v)
    }

    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        let offsets = self.matrix.row_offsets();
        let cols = self.matrix.col_indices();
        let vals = self.matrix.values();
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in offsets[r]..offsets[r + 1] {
                acc += vals[p] * v[cols[p]];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        linalg::csr_to_dense(&self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix
            .values()
            .iter()
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.side())
            .map(|r| {
                self.matrix
                    .get_entry(r, r)
                    .map(|e| e.into_value())
                    .unwrap_or(ZERO)
            })
            .collect()
    }
}

/// Assembles the Liouvillian of `model`; fails for projected dissipation and
/// above the size caps.
pub fn liouvillian(model: &LindbladModel) -> Result<Liouvillian> {
    let jumps = model.jumps()?;
    let d = model.basis().dimension();
    match model.basis().kind() {
        BasisKind::TensorProduct { emitters } if emitters > MAX_LIOUVILLIAN_EMITTERS => {
            return Err(Error::EmitterCountOutOfRange {
                emitters,
                min: 1,
                max: MAX_LIOUVILLIAN_EMITTERS,
            });
        }
        BasisKind::Dicke { .. } if d > MAX_LIOUVILLIAN_DICKE_DIM => {
            return Err(Error::Unsupported(format!(
                "Liouvillian of a {d}-dimensional Dicke manifold exceeds the supported size {MAX_LIOUVILLIAN_DICKE_DIM}"
            )));
        }
        _ => {}
    }
    let h = model.hamiltonian().to_csr();
    let g = model.dissipator_sum().to_csr();
    // K = -iH - G/2
    let k = &linalg::csr_scale(&h, -I) + &linalg::csr_scale(&g, C64::new(-0.5, 0.0));
    let ls: Vec<(f64, CsrMatrix<C64>)> = jumps
        .iter()
        .filter(|j| j.rate != 0.0)
        .map(|j| (j.rate, j.op.to_csr()))
        .collect();

    let n = d * d;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(usize, C64)> = Vec::new();
    offsets.push(0);
    for j in 0..d {
        for i in 0..d {
            row.clear();
            let ki = k.row(i);
            for (&c, v) in ki.col_indices().iter().zip(ki.values()) {
                row.push((j * d + c, *v));
            }
            let kj = k.row(j);
            for (&b, v) in kj.col_indices().iter().zip(kj.values()) {
                row.push((b * d + i, v.conj()));
            }
            for (rate, l) in &ls {
                let lj = l.row(j);
                let li = l.row(i);
                for (&b, vb) in lj.col_indices().iter().zip(lj.values()) {
                    let left = vb.conj() * *rate;
                    for (&c, vc) in li.col_indices().iter().zip(li.values()) {
                        row.push((b * d + c, left * vc));
                    }
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in row.iter() {
                if c == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = c;
                }
            }
            offsets.push(cols.len());
        }
    }
    let matrix = CsrMatrix::try_from_csr_data(n, n, offsets, cols, vals)
        .map_err(|e| Error::LinearAlgebra(format!("Liouvillian assembly: {e}")))?;
    Ok(Liouvillian {
        hilbert_dim: d,
        matrix,
    })
}
