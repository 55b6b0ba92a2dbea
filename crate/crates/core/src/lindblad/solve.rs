use std::time::Instant;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Accum, Mat, Par};
use nalgebra::{DMatrix, DVector};

use super::gmres::gmres;
use super::liouvillian::{liouvillian, Liouvillian};
use super::LindbladModel;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::operator::{devectorize_matrix, vectorize_matrix};
use crate::state::{DensityMatrix, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Dense singular-value decomposition up to `dense_max_side`; sparse LU
    /// for Dicke bases and preconditioned GMRES for tensor bases beyond.
    Auto,
    DenseSvd,
    SparseLu,
    Gmres,
}

impl SolveMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMethod::Auto => "auto",
            SolveMethod::DenseSvd => "dense-svd",
            SolveMethod::SparseLu => "sparse-lu",
            SolveMethod::Gmres => "gmres",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub method: SolveMethod,
    /// Largest Liouvillian side handled by the dense path.
    pub dense_max_side: usize,
    /// Accepted residual is `residual_factor · d` with `d` the Hilbert dimension.
    pub residual_factor: f64,
    /// A second singular value below `uniqueness_rel · ‖𝓛‖` marks a degenerate null space.
    pub uniqueness_rel: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
    pub gmres_tol: f64,
    /// Propagate the solution for this time and record the drift; `None` skips the check.
    pub spot_check_time: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolveMethod::Auto,
            dense_max_side: 1024,
            residual_factor: 1e-10,
            uniqueness_rel: 1e-8,
            gmres_restart: 60,
            gmres_max_iter: 6000,
            gmres_tol: 1e-13,
            spot_check_time: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// `‖𝓛 vec(ρ)‖₂` of the returned state.
    pub residual: f64,
    pub residual_bound: f64,
    pub iterations: usize,
    /// `Some(false)` when a degenerate null space was detected and resolved
    /// by projecting `|↓…↓⟩⟨↓…↓|`; `None` when uniqueness was not verified.
    pub unique: Option<bool>,
    pub null_dimension: Option<usize>,
    pub second_singular_value: Option<f64>,
    pub drift: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub report: SolveReport,
}

/// Solves `𝓛[ρ] = 0` with `Tr ρ = 1`.
pub fn steady_state(model: &LindbladModel, config: &SolverConfig) -> Result<SteadyState> {
    let start = Instant::now();
    let l = liouvillian(model)?;
    let d = l.hilbert_dim();
    let method = match config.method {
        SolveMethod::Auto if l.side() <= config.dense_max_side => SolveMethod::DenseSvd,
        SolveMethod::Auto if model.basis().is_dicke() => SolveMethod::SparseLu,
        SolveMethod::Auto => SolveMethod::Gmres,
        m => m,
    };
    let mut report = SolveReport {
        method,
        residual: f64::NAN,
        residual_bound: config.residual_factor * d as f64,
        iterations: 0,
        unique: None,
        null_dimension: None,
        second_singular_value: None,
        drift: None,
        seconds: 0.0,
    };
    let raw = match method {
        SolveMethod::DenseSvd => dense_null_space(&l, config, &mut report)?,
        SolveMethod::SparseLu => sparse_lu(&l)?,
        SolveMethod::Gmres => preconditioned_gmres(model, &l, config, &mut report)?,
        SolveMethod::Auto => unreachable!(),
    };
    let m = devectorize_matrix(&raw)?;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::LinearAlgebra(
            "steady-state candidate has zero trace".into(),
        ));
    }
    let m = m / tr;
    let v = vectorize_matrix(&m);
    report.residual = l.apply(&v).norm();
    if !(report.residual < report.residual_bound) {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: report.residual,
        });
    }
    if let Some(t) = config.spot_check_time {
        let evolved = propagate(&l, &v, t);
        report.drift = Some(
            (&evolved - &v)
                .iter()
                .fold(0.0, |acc: f64, z| acc.max(z.norm())),
        );
    }
    let rho = DensityMatrix::new(model.basis().clone(), m)?;
    report.seconds = start.elapsed().as_secs_f64();
    Ok(SteadyState { rho, report })
}

fn to_faer_dense(l: &Liouvillian) -> Mat<C64> {
    let n = l.side();
    let mut m = Mat::<C64>::zeros(n, n);
    for (i, j, v) in l.matrix().triplet_iter() {
        m[(i, j)] += *v;
    }
    m
}

fn dense_null_space(
    l: &Liouvillian,
    config: &SolverConfig,
    report: &mut SolveReport,
) -> Result<DVector<C64>> {
    let n = l.side();
    let a = to_faer_dense(l);
    let svd = a
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = (0..n).map(|i| svd.S()[i].re).collect();
    let smax = s.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // faer returns singular values in non-increasing order
    let cutoff = config.uniqueness_rel * smax;
    let k = s.iter().filter(|&&x| x <= cutoff).count().max(1);
    report.null_dimension = Some(k);
    report.second_singular_value = (n >= 2).then(|| s[n - 2]);
    report.unique = Some(k == 1);
    let v = svd.V();
    let u = svd.U();
    if k == 1 {
        return Ok(DVector::from_fn(n, |i, _| v[(i, n - 1)]));
    }
    // biorthogonal spectral projection of |↓…↓⟩⟨↓…↓| onto the null space
    let right = DMatrix::from_fn(n, k, |i, j| v[(i, n - k + j)]);
    let left = DMatrix::from_fn(n, k, |i, j| u[(i, n - k + j)]);
    let overlap = left.adjoint() * &right;
    let lu = overlap.clone().lu();
    let weights = left.adjoint().column(0).into_owned();
    let coeffs = lu
        .solve(&weights)
        .filter(|c| c.iter().all(|z| z.is_finite()))
        .ok_or_else(|| {
            Error::LinearAlgebra("null space is not semisimple; projection undefined".into())
        })?;
    Ok(right * coeffs)
}

/// Scale of the rank-one trace row added to `𝓛`.
fn trace_row_scale(l: &Liouvillian) -> f64 {
    l.max_abs().max(1.0)
}

fn sparse_lu(l: &Liouvillian) -> Result<DVector<C64>> {
    let n = l.side();
    let d = l.hilbert_dim();
    let s = trace_row_scale(l);
    let mut trip: Vec<Triplet<usize, usize, C64>> = l
        .matrix()
        .triplet_iter()
        .map(|(i, j, v)| Triplet::new(i, j, *v))
        .collect();
    trip.extend((0..d).map(|j| Triplet::new(0, j * d + j, C64::new(s, 0.0))));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::LinearAlgebra(format!("sparse assembly: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::LinearAlgebra(format!("sparse LU: {e:?}")))?;
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(s, 0.0);
    let mut x = lu.solve(&rhs);
    // one step of iterative refinement
    let xv = DVector::from_fn(n, |i, _| x[(i, 0)]);
    let mut r = l.apply(&xv);
    let t: C64 = (0..d).map(|j| xv[j * d + j]).sum();
    r[0] += C64::new(s, 0.0) * t;
    let mut corr = Mat::<C64>::from_fn(n, 1, |i, _| rhs[(i, 0)] - r[i]);
    lu.solve_in_place(&mut corr);
    for i in 0..n {
        x[(i, 0)] += corr[(i, 0)];
    }
    Ok(DVector::from_fn(n, |i, _| x[(i, 0)]))
}

/// Right preconditioner: the coherent and anticommutator part of `𝓛` made
/// diagonal in the eigenbasis of `H`, inverted entrywise.
struct EigenbasisPreconditioner {
    u: Mat<C64>,
    inv_denominators: Mat<C64>,
}

impl EigenbasisPreconditioner {
    fn new(model: &LindbladModel) -> Result<Self> {
        let h = model.hamiltonian().to_dense();
        let g = model.dissipator_sum().to_dense();
        let (energies, vecs) = linalg::hermitian_eigen(&h)?;
        let d = energies.len();
        let gt = vecs.adjoint() * g * &vecs;
        let decay: Vec<f64> = (0..d).map(|i| gt[(i, i)].re).collect();
        let scale = decay.iter().cloned().fold(0.0, f64::max).max(1e-3);
        let floor = 1e-2 * scale;
        let inv_denominators = Mat::from_fn(d, d, |i, j| {
            let den = C64::new(-0.5 * (decay[i] + decay[j]), -(energies[i] - energies[j]));
            let den = if den.norm() < floor {
                C64::new(-floor, den.im)
            } else {
                den
            };
            ONE / den
        });
        Ok(Self {
            u: linalg::to_faer(&vecs),
            inv_denominators,
        })
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let d = self.u.nrows();
        let xm = faer::MatRef::from_column_major_slice(x, d, d);
        let mut tmp = Mat::<C64>::zeros(d, d);
        let mut t2 = Mat::<C64>::zeros(d, d);
        // X̃ = U† X U
        matmul(
            tmp.as_mut(),
            Accum::Replace,
            self.u.adjoint(),
            xm,
            ONE,
            Par::Seq,
        );
        matmul(
            t2.as_mut(),
            Accum::Replace,
            tmp.as_ref(),
            self.u.as_ref(),
            ONE,
            Par::Seq,
        );
        for j in 0..d {
            for i in 0..d {
                t2[(i, j)] *= self.inv_denominators[(i, j)];
            }
        }
        matmul(
            tmp.as_mut(),
            Accum::Replace,
            self.u.as_ref(),
            t2.as_ref(),
            ONE,
            Par::Seq,
        );
        let om = faer::MatMut::from_column_major_slice_mut(out, d, d);
        matmul(
            om,
            Accum::Replace,
            tmp.as_ref(),
            self.u.adjoint(),
            ONE,
            Par::Seq,
        );
    }
}

fn preconditioned_gmres(
    model: &LindbladModel,
    l: &Liouvillian,
    config: &SolverConfig,
    report: &mut SolveReport,
) -> Result<DVector<C64>> {
    let n = l.side();
    let d = l.hilbert_dim();
    let s = C64::new(trace_row_scale(l), 0.0);
    let apply = |x: &[C64], out: &mut [C64]| {
        l.apply_into(x, out);
        let t: C64 = (0..d).map(|j| x[j * d + j]).sum();
        out[0] += s * t;
    };
    let pre = EigenbasisPreconditioner::new(model)?;
    let precond = |x: &[C64], out: &mut [C64]| pre.apply(x, out);
    let mut b = vec![ZERO; n];
    b[0] = s;
    let x0 = PureState::ground(model.basis().clone()).projector();
    let out = gmres(
        &apply,
        Some(&precond),
        &b,
        Some(x0.as_slice()),
        config.gmres_restart,
        config.gmres_max_iter,
        config.gmres_tol,
    );
    report.iterations = out.iterations;
    if !out.relative_residual.is_finite() {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    Ok(DVector::from_vec(out.x))
}

/// Integrates `d vec(ρ)/dt = 𝓛 vec(ρ)` for a time `t` with classical RK4.
pub fn propagate(l: &Liouvillian, v: &DVector<C64>, t: f64) -> DVector<C64> {
    let rows = l
        .matrix()
        .row_iter()
        .map(|r| r.values().iter().map(|z| z.norm()).sum::<f64>());
    let bound = rows.fold(0.0, f64::max).max(1e-12);
    let steps = ((t * bound).ceil() as usize).max(1);
    let h = C64::new(t / steps as f64, 0.0);
    let half = C64::new(0.5, 0.0);
    let mut y = v.clone();
    for _ in 0..steps {
        let k1 = l.apply(&y);
        let k2 = l.apply(&(&y + &k1 * (h * half)));
        let k3 = l.apply(&(&y + &k2 * (h * half)));
        let k4 = l.apply(&(&y + &k3 * h));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * (h / C64::new(6.0, 0.0));
    }
    y
}
