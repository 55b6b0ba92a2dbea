//! Steady states and spin squeezing of driven-dissipative spin ensembles.
//!
//! Exact steady states come from the Lindblad Liouvillian; pure-state
//! perturbation theory provides the weak-coupling expansion around a dark
//! state of the unperturbed problem.

// `!(x < tol)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod dicke;
pub mod error;
pub mod full_basis;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod perturbation;
pub mod squeezing;
pub mod state;
pub mod sweep;

pub use dicke::{collective_ops, symmetric_ops, CollectiveOps, DickeLadderTable, LadderFault};
pub use error::{Error, Result};
pub use full_basis::{site_ops, symmetric_isometry, SiteOperatorSet, SymmetricIsometry};
pub use linalg::C64;
pub use lindblad::{
    liouvillian, steady_state, Dissipation, Jump, LindbladModel, SolverConfig, SteadyState,
};
pub use models::{Backend, BuiltModel, DickeParams, TfiParams, XyzParams};
pub use operator::{commutator, expectation, BasisKind, HilbertBasis, Operator};
pub use perturbation::{perturb_model, Eigensystem, Engine, PerturbedState};
pub use squeezing::{qfi, squeezing_report, SqueezingReport};
pub use state::{DensityMatrix, PureState, StateRef};
pub use sweep::{run, Command, ScanConfig, Table};
