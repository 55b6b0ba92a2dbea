//! Single-emitter operators on the `2^N` tensor-product space.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dicke::CollectiveOps;
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::operator::{bit_of, HilbertBasis, Operator};
use crate::state::DensityMatrix;

pub const MAX_SITE_EMITTERS: usize = 12;

#[derive(Clone, Debug)]
pub struct SiteOps {
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub splus: Operator,
    pub sminus: Operator,
}

#[derive(Clone, Debug)]
pub struct SiteOperatorSet {
    basis: Arc<HilbertBasis>,
    sites: Vec<SiteOps>,
}

impl SiteOperatorSet {
    pub fn emitters(&self) -> usize {
        self.sites.len()
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn site(&self, i: usize) -> &SiteOps {
        &self.sites[i]
    }

    pub fn sites(&self) -> &[SiteOps] {
        &self.sites
    }

    /// `Σᵢ Sᵢ^α` for every component.
    pub fn collective(&self) -> Result<CollectiveOps> {
        let sum = |pick: fn(&SiteOps) -> &Operator| {
            self.sites
                .iter()
                .skip(1)
                .fold(pick(&self.sites[0]).clone(), |acc, s| &acc + pick(s))
        };
        CollectiveOps::from_ladder(sum(|s| &s.splus), sum(|s| &s.sminus), sum(|s| &s.sz))
    }
}

/// Spin-1/2 operators for every site of an `N`-emitter register, `1 ≤ N ≤ 12`.
pub fn site_ops(emitters: usize) -> Result<SiteOperatorSet> {
    if !(1..=MAX_SITE_EMITTERS).contains(&emitters) {
        return Err(Error::EmitterCountOutOfRange {
            emitters,
            min: 1,
            max: MAX_SITE_EMITTERS,
        });
    }
    let basis = Arc::new(HilbertBasis::tensor(emitters)?);
    let dim = basis.dimension();
    let mut sites = Vec::with_capacity(emitters);
    for i in 0..emitters {
        let mask = 1usize << (emitters - 1 - i);
        let plus: Vec<_> = (0..dim)
            .filter(|b| b & mask == 0)
            .map(|b| (b | mask, b, ONE))
            .collect();
        let splus = Operator::from_triplets(basis.clone(), plus.iter().copied())?;
        let sminus =
            Operator::from_triplets(basis.clone(), plus.iter().map(|&(r, c, v)| (c, r, v)))?;
        let sz = Operator::from_triplets(
            basis.clone(),
            (0..dim).map(|b| {
                (
                    b,
                    b,
                    C64::new(if bit_of(b, i, emitters) { 0.5 } else { -0.5 }, 0.0),
                )
            }),
        )?
        .into_hermitian()?;
        let half = C64::new(0.5, 0.0);
        let sx = (&splus + &sminus).scale(half).into_hermitian()?;
        let sy = (&splus - &sminus)
            .scale(C64::new(0.0, -0.5))
            .into_hermitian()?;
        sites.push(SiteOps {
            sx,
            sy,
            sz,
            splus,
            sminus,
        });
    }
    Ok(SiteOperatorSet { basis, sites })
}

/// Isometry `V` embedding the `J = N/2` Dicke manifold into the tensor space.
#[derive(Clone, Debug)]
pub struct SymmetricIsometry {
    dicke: Arc<HilbertBasis>,
    tensor: Arc<HilbertBasis>,
    matrix: DMatrix<C64>,
}

impl SymmetricIsometry {
    pub fn dicke_basis(&self) -> &Arc<HilbertBasis> {
        &self.dicke
    }

    pub fn tensor_basis(&self) -> &Arc<HilbertBasis> {
        &self.tensor
    }

    /// `2^N × (N+1)` matrix with orthonormal columns.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn lift_vector(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    /// `V ρ V†`.
    pub fn lift_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(
            self.tensor.clone(),
            &self.matrix * rho.matrix() * self.matrix.adjoint(),
        )
    }

    /// `V† ρ V` for a dense tensor-space matrix.
    pub fn restrict_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        self.matrix.adjoint() * m * &self.matrix
    }

    /// `V† A V`.
    pub fn restrict(&self, op: &Operator) -> Result<Operator> {
        if **op.basis() != *self.tensor {
            return Err(Error::BasisMismatch {
                left: op.basis().to_string(),
                right: self.tensor.to_string(),
            });
        }
        let av = op.mul_dense(&self.matrix);
        Operator::from_dense(self.dicke.clone(), self.matrix.adjoint() * av)
    }
}

/// Maps `|N/2, M⟩` to the normalized uniform superposition of bit-strings
/// with `N/2 + M` up-spins.
pub fn symmetric_isometry(emitters: usize) -> Result<SymmetricIsometry> {
    if !(1..=MAX_SITE_EMITTERS).contains(&emitters) {
        return Err(Error::EmitterCountOutOfRange {
            emitters,
            min: 1,
            max: MAX_SITE_EMITTERS,
        });
    }
    let dicke = Arc::new(HilbertBasis::dicke_symmetric(emitters)?);
    let tensor = Arc::new(HilbertBasis::tensor(emitters)?);
    let dim = tensor.dimension();
    let mut matrix = DMatrix::from_element(dim, emitters + 1, ZERO);
    for k in 0..=emitters {
        let amp = C64::new(1.0 / binomial(emitters, k).sqrt(), 0.0);
        for b in (0..dim).filter(|b| b.count_ones() as usize == k) {
            matrix[(b, k)] = amp;
        }
    }
    Ok(SymmetricIsometry {
        dicke,
        tensor,
        matrix,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::commutator;

    #[test]
    fn lowering_single_site() {
        let s = site_ops(1).unwrap();
        let up = DVector::from_vec(vec![ZERO, ONE]);
        let out = s.site(0).sminus.matvec(&up);
        assert_eq!(out.as_slice(), &[ONE, ZERO]);
    }

    #[test]
    fn site_number_operator() {
        let s = site_ops(3).unwrap();
        for site in s.sites() {
            let lhs = &site.splus * &site.sminus;
            let rhs = &site.sz + &Operator::identity(s.basis().clone()).scale(C64::new(0.5, 0.0));
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
        }
    }

    #[test]
    fn distinct_sites_commute() {
        let s = site_ops(4).unwrap();
        let c = commutator(&s.site(0).sx, &s.site(3).sy).unwrap();
        assert!(c.max_abs() < 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(site_ops(0).is_err());
        assert!(site_ops(13).is_err());
    }

    #[test]
    fn isometry_columns() {
        let v = symmetric_isometry(2).unwrap();
        let m = v.matrix();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(m[(0, 0)], ONE);
        assert!((m[(1, 1)].re - r).abs() < 1e-15 && (m[(2, 1)].re - r).abs() < 1e-15);
        let gram = m.adjoint() * m;
        assert!(crate::linalg::max_abs_diff(&gram, &DMatrix::identity(3, 3)) < 1e-12);
    }
}
