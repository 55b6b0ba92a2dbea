//! Pure states and density matrices with validity diagnostics.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE};
use crate::operator::HilbertBasis;

pub const NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const HERM_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PureState {
    basis: Arc<HilbertBasis>,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Wraps `amplitudes`; the norm must be 1 within `1e-10`.
    pub fn new(basis: Arc<HilbertBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(basis: Arc<HilbertBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(Self {
            basis,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis_state(basis: Arc<HilbertBasis>, index: usize) -> Self {
        let mut v = DVector::zeros(basis.dimension());
        v[index] = ONE;
        Self {
            basis,
            amplitudes: v,
        }
    }

    /// `|↓…↓⟩`.
    pub fn ground(basis: Arc<HilbertBasis>) -> Self {
        let idx = basis.ground_index();
        Self::basis_state(basis, idx)
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Validity measures of a (candidate) density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub trace_dev: f64,
    pub herm_dev: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl Diagnostics {
    pub fn of(m: &DMatrix<C64>) -> Self {
        let trace_dev = (m.trace() - ONE).norm();
        let herm_dev = linalg::hermitian_deviation(m);
        let min_eigenvalue = linalg::hermitian_eigen(m)
            .ok()
            .and_then(|(vals, _)| vals.first().copied())
            .unwrap_or(f64::NAN);
        let purity = (m * m).trace().re;
        Self {
            trace_dev,
            herm_dev,
            min_eigenvalue,
            purity,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.trace_dev < TRACE_TOL
            && self.herm_dev < HERM_TOL
            && self.min_eigenvalue > -POSITIVITY_TOL
            && self.purity > 0.0
            && self.purity <= 1.0 + TRACE_TOL
    }

    fn violation(&self) -> Option<String> {
        if !(self.trace_dev < TRACE_TOL) {
            Some(format!("trace deviation {:.3e}", self.trace_dev))
        } else if !(self.herm_dev < HERM_TOL) {
            Some(format!("Hermiticity deviation {:.3e}", self.herm_dev))
        } else if !(self.min_eigenvalue > -POSITIVITY_TOL) {
            Some(format!("minimum eigenvalue {:.3e}", self.min_eigenvalue))
        } else if !(self.purity > 0.0 && self.purity <= 1.0 + TRACE_TOL) {
            Some(format!("purity {:.12}", self.purity))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    basis: Arc<HilbertBasis>,
    matrix: DMatrix<C64>,
    diagnostics: Diagnostics,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity, positivity and purity.
    pub fn new(basis: Arc<HilbertBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::new_unchecked(basis, matrix)?;
        match rho.diagnostics.violation() {
            None => Ok(rho),
            Some(reason) => Err(Error::InvalidDensityMatrix { reason }),
        }
    }

    /// Computes diagnostics without enforcing them; only the shape is checked.
    pub fn new_unchecked(basis: Arc<HilbertBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = basis.dimension();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim,
            });
        }
        let diagnostics = Diagnostics::of(&matrix);
        Ok(Self {
            basis,
            matrix,
            diagnostics,
        })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let matrix = psi.projector();
        let diagnostics = Diagnostics::of(&matrix);
        Self {
            basis: psi.basis.clone(),
            matrix,
            diagnostics,
        }
    }

    pub fn maximally_mixed(basis: Arc<HilbertBasis>) -> Self {
        let d = basis.dimension();
        let matrix = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        let diagnostics = Diagnostics::of(&matrix);
        Self {
            basis,
            matrix,
            diagnostics,
        }
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn purity(&self) -> f64 {
        self.diagnostics.purity
    }

    /// Largest entrywise distance to the projector onto `psi`.
    pub fn distance_to_pure(&self, psi: &DVector<C64>) -> f64 {
        let p = psi * psi.adjoint();
        linalg::max_abs_diff(&self.matrix, &p)
    }
}

/// Diagnostics of `rho`.
pub fn diagnostics(rho: &DensityMatrix) -> Diagnostics {
    rho.diagnostics()
}

/// Borrowed pure or mixed state, accepted wherever either representation works.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl<'a> StateRef<'a> {
    pub fn basis(&self) -> &'a Arc<HilbertBasis> {
        match self {
            StateRef::Pure(p) => &p.basis,
            StateRef::Mixed(m) => &m.basis,
        }
    }

    /// Dense density matrix of the state.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        match self {
            StateRef::Pure(p) => p.projector(),
            StateRef::Mixed(m) => m.matrix.clone(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, StateRef::Pure(_))
    }
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(p: &'a PureState) -> Self {
        StateRef::Pure(p)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(m: &'a DensityMatrix) -> Self {
        StateRef::Mixed(m)
    }
}

fn check_len(basis: &HilbertBasis, len: usize) -> Result<()> {
    let dim = basis.dimension();
    if len != dim {
        return Err(Error::DimensionMismatch {
            rows: len,
            cols: 1,
            dim,
        });
    }
    Ok(())
}
