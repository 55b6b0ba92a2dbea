//! Lindblad models, their Liouvillian superoperators and steady states.

mod gmres;
mod liouvillian;
mod solve;

use std::sync::Arc;

pub use gmres::{gmres, GmresOutcome};
pub use liouvillian::{liouvillian, Liouvillian};
pub use solve::{propagate, steady_state, SolveMethod, SolveReport, SolverConfig, SteadyState};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operator::{commutator, HilbertBasis, Operator};

/// A jump operator `L` with rate `γ ≥ 0`; the dissipator is `γ(LρL† − ½{L†L, ρ})`.
#[derive(Clone, Debug)]
pub struct Jump {
    pub op: Operator,
    pub rate: f64,
}

impl Jump {
    pub fn new(op: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "jump rate {rate} must be finite and non-negative"
            )));
        }
        Ok(Self { op, rate })
    }
}

#[derive(Clone, Debug)]
pub enum Dissipation {
    /// Explicit jump operators; a Liouvillian exists.
    Jumps(Vec<Jump>),
    /// Individual emission at rate `gamma` seen from inside the symmetric Dicke
    /// manifold. Only the quantities needed by the pure-state engines are
    /// available: `Σᵢ γ Sᵢ⁺Sᵢ⁻ = γ(Jz + N/2)`, and for symmetric states the
    /// second-order jump term equals that of a single `J⁻` jump at rate `γ/N`.
    ProjectedIndividual {
        gamma: f64,
        jz: Operator,
        jminus: Operator,
    },
}

/// `H = H0 + λ H1` together with its dissipation channels.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    basis: Arc<HilbertBasis>,
    h0: Operator,
    h1: Operator,
    lambda: f64,
    dissipation: Dissipation,
    u1_symmetric: bool,
}

impl LindbladModel {
    pub fn new(h0: Operator, h1: Operator, lambda: f64, jumps: Vec<Jump>) -> Result<Self> {
        Self::with_dissipation(h0, h1, lambda, Dissipation::Jumps(jumps))
    }

    pub fn with_dissipation(
        h0: Operator,
        h1: Operator,
        lambda: f64,
        dissipation: Dissipation,
    ) -> Result<Self> {
        let basis = h0.basis().clone();
        let same = |op: &Operator| -> Result<()> {
            if **op.basis() == *basis {
                Ok(())
            } else {
                Err(Error::BasisMismatch {
                    left: basis.to_string(),
                    right: op.basis().to_string(),
                })
            }
        };
        same(&h1)?;
        let h0 = h0.into_hermitian()?;
        let h1 = h1.into_hermitian()?;
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling λ = {lambda} is not finite"
            )));
        }
        match &dissipation {
            Dissipation::Jumps(jumps) => {
                for j in jumps {
                    same(&j.op)?;
                    if !(j.rate >= 0.0 && j.rate.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "jump rate {} must be non-negative",
                            j.rate
                        )));
                    }
                }
            }
            Dissipation::ProjectedIndividual { gamma, jz, jminus } => {
                same(jz)?;
                same(jminus)?;
                if !basis.is_dicke() {
                    return Err(Error::Unsupported(
                        "projected individual emission needs a Dicke basis".into(),
                    ));
                }
                if !(*gamma >= 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "decay rate {gamma} must be non-negative"
                    )));
                }
            }
        }
        Ok(Self {
            basis,
            h0,
            h1,
            lambda,
            dissipation,
            u1_symmetric: false,
        })
    }

    /// Marks the model as conserving `Jz` under `H0`; fails unless `‖[H0, Jz]‖_max < 1e-12`.
    pub fn with_u1_symmetry(mut self, jz: &Operator) -> Result<Self> {
        let c = commutator(&self.h0, jz)?.max_abs();
        if c >= 1e-12 {
            return Err(Error::AssumptionViolated(format!(
                "[H0, Jz] has magnitude {c:.3e}"
            )));
        }
        self.u1_symmetric = true;
        Ok(self)
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn h1(&self) -> &Operator {
        &self.h1
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn u1_symmetric(&self) -> bool {
        self.u1_symmetric
    }

    pub fn dissipation(&self) -> &Dissipation {
        &self.dissipation
    }

    /// Same model at a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// `H0 + λ H1`.
    pub fn hamiltonian(&self) -> Operator {
        let h = &self.h0 + &self.h1.scale(C64::new(self.lambda, 0.0));
        h.into_hermitian().expect("sum of Hermitian operators")
    }

    /// Explicit jump list; unavailable for projected dissipation.
    pub fn jumps(&self) -> Result<&[Jump]> {
        match &self.dissipation {
            Dissipation::Jumps(j) => Ok(j),
            Dissipation::ProjectedIndividual { .. } => Err(Error::NotLiouvillian(
                "individual emission projected onto the Dicke manifold has no Liouvillian; use the full tensor basis".into(),
            )),
        }
    }

    /// Jumps that reproduce the pure-state engines' dissipative terms.
    pub fn effective_jumps(&self) -> Vec<Jump> {
        match &self.dissipation {
            Dissipation::Jumps(j) => j.clone(),
            Dissipation::ProjectedIndividual { gamma, jminus, .. } => {
                let n = self.basis.emitters() as f64;
                vec![Jump {
                    op: jminus.clone(),
                    rate: gamma / n,
                }]
            }
        }
    }

    /// `G = Σⱼ γⱼ Lⱼ†Lⱼ`.
    pub fn dissipator_sum(&self) -> Operator {
        match &self.dissipation {
            Dissipation::Jumps(jumps) => {
                let mut g = Operator::zeros(self.basis.clone());
                for j in jumps {
                    g = &g + &(&j.op.adjoint() * &j.op).scale(C64::new(j.rate, 0.0));
                }
                g
            }
            Dissipation::ProjectedIndividual { gamma, jz, .. } => {
                let n = self.basis.emitters() as f64;
                let shift = Operator::identity(self.basis.clone()).scale(C64::new(n / 2.0, 0.0));
                (jz + &shift).scale(C64::new(*gamma, 0.0))
            }
        }
    }
}
