//! Spin-squeezing diagnostics: Wineland parameter, quantum Fisher information
//! and two-site correlators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};

use crate::dicke::CollectiveOps;
use crate::error::{Error, Result};
use crate::full_basis::SiteOperatorSet;
use crate::linalg::{self, C64};
use crate::operator::Operator;
use crate::perturbation::PerturbedState;
use crate::state::{PureState, StateRef};

/// `|⟨J⟩|` below this is reported as [`Error::VanishingMeanSpin`].
pub const MEAN_SPIN_TOL: f64 = 1e-9;
/// Density-matrix eigenvalue pairs with `p_k + p_l` below this are skipped in the QFI.
pub const QFI_EIGEN_TOL: f64 = 1e-12;

/// First and second moments of `(Jx, Jy, Jz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMoments {
    pub mean: Vector3<f64>,
    /// `½⟨{Jₐ, J_b}⟩`.
    pub second: Matrix3<f64>,
}

impl SpinMoments {
    pub fn covariance(&self) -> Matrix3<f64> {
        self.second - self.mean * self.mean.transpose()
    }
}

fn check_basis(ops: &CollectiveOps, state: &StateRef<'_>) -> Result<()> {
    if ops.basis() != state.basis() {
        return Err(Error::BasisMismatch {
            left: ops.basis().to_string(),
            right: state.basis().to_string(),
        });
    }
    Ok(())
}

fn check_pure_norm(psi: &PureState) -> Result<()> {
    let n = psi.amplitudes().norm_squared();
    if (n - 1.0).abs() > crate::state::NORM_TOL {
        return Err(Error::NotNormalized { deviation: n - 1.0 });
    }
    Ok(())
}

pub fn spin_moments<'a>(
    state: impl Into<StateRef<'a>>,
    ops: &CollectiveOps,
) -> Result<SpinMoments> {
    let state = state.into();
    check_basis(ops, &state)?;
    let js = [&ops.jx, &ops.jy, &ops.jz];
    let mut mean = Vector3::zeros();
    let mut second = Matrix3::zeros();
    match state {
        StateRef::Pure(psi) => {
            check_pure_norm(psi)?;
            let v = psi.amplitudes();
            let images: Vec<DVector<C64>> = js.iter().map(|j| j.matvec(v)).collect();
            for a in 0..3 {
                mean[a] = v.dotc(&images[a]).re;
                for b in a..3 {
                    let m = images[a].dotc(&images[b]).re;
                    second[(a, b)] = m;
                    second[(b, a)] = m;
                }
            }
        }
        StateRef::Mixed(rho) => {
            let m = rho.matrix();
            let images: Vec<DMatrix<C64>> = js.iter().map(|j| j.mul_dense(m)).collect();
            for a in 0..3 {
                mean[a] = images[a].trace().re;
                for b in a..3 {
                    // ½ Tr({Jₐ, J_b} ρ) = Re Tr(Jₐ J_b ρ) for Hermitian ρ
                    let t = js[a].trace_product(&images[b]).re;
                    second[(a, b)] = t;
                    second[(b, a)] = t;
                }
            }
        }
    }
    Ok(SpinMoments { mean, second })
}

/// Orthonormal pair `(e₁, e₂)` perpendicular to `n`: `e₁` is `x̂` projected
/// off `n` (or `ŷ` when `n ∥ x̂`) and `e₂ = e₁ × n`.
pub fn transverse_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let n = n.normalize();
    let mut e1 = Vector3::x() - n * n.x;
    if e1.norm() < 1e-6 {
        e1 = Vector3::y() - n * n.y;
    }
    let e1 = e1.normalize();
    (e1, e1.cross(&n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingReport {
    pub emitters: usize,
    pub mean_spin: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    /// Covariance of `(J·e₁, J·e₂)`.
    pub transverse_cov: Matrix2<f64>,
    pub var_min: f64,
    pub var_max: f64,
    /// Angle in `[0, π)` from `e₁` towards `e₂` of the least-noisy direction.
    pub theta_min: f64,
    /// `N Var_min / |⟨J⟩|²`.
    pub xi2: f64,
    /// `N Var_max / |⟨J⟩|²`.
    pub xi2_anti: f64,
    /// QFI for the generator along the anti-squeezed direction.
    pub qfi_anti: f64,
    /// `Var_min Var_max / (|⟨J⟩|²/4)`; at least 1.
    pub uncertainty_product: f64,
}

impl SqueezingReport {
    /// Unit vector of the squeezed quadrature.
    pub fn squeezed_axis(&self) -> Vector3<f64> {
        self.e1 * self.theta_min.cos() + self.e2 * self.theta_min.sin()
    }

    pub fn anti_squeezed_axis(&self) -> Vector3<f64> {
        -self.e1 * self.theta_min.sin() + self.e2 * self.theta_min.cos()
    }

    /// `ξ²` along the transverse direction at angle `theta` from `e₁`.
    pub fn xi2_at(&self, theta: f64) -> f64 {
        let u = nalgebra::Vector2::new(theta.cos(), theta.sin());
        self.emitters as f64 * (u.transpose() * self.transverse_cov * u)[(0, 0)]
            / self.mean_spin.norm_squared()
    }
}

fn to_array(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Minimizes the transverse variance in closed form and evaluates the QFI
/// along the orthogonal direction.
pub fn squeezing_report<'a>(
    state: impl Into<StateRef<'a>>,
    ops: &CollectiveOps,
) -> Result<SqueezingReport> {
    let state = state.into();
    let moments = spin_moments(state, ops)?;
    let norm = moments.mean.norm();
    if norm < MEAN_SPIN_TOL {
        return Err(Error::VanishingMeanSpin { norm });
    }
    let (e1, e2) = transverse_frame(&moments.mean);
    let cov3 = moments.covariance();
    let basis = nalgebra::Matrix3x2::from_columns(&[e1, e2]);
    let cov = basis.transpose() * cov3 * basis;
    let cov = (cov + cov.transpose()) * 0.5;
    let (a, b, c) = (cov[(0, 0)], cov[(1, 1)], cov[(0, 1)]);
    let mid = 0.5 * (a + b);
    let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
    let (var_min, var_max) = (mid - rad, mid + rad);
    let theta_min = (0.5 * (-2.0 * c).atan2(b - a)).rem_euclid(PI) + 0.0; // no -0.0
    let theta_min = if (PI - theta_min) < 1e-15 {
        0.0
    } else {
        theta_min
    };
    let n = ops.emitters() as f64;
    let j2 = norm * norm;

    let anti = -e1 * theta_min.sin() + e2 * theta_min.cos();
    let qfi_anti = match state {
        StateRef::Pure(_) => 4.0 * var_max,
        StateRef::Mixed(_) => qfi(state, &ops.along(to_array(&anti)))?,
    };
    Ok(SqueezingReport {
        emitters: ops.emitters(),
        mean_spin: moments.mean,
        e1,
        e2,
        transverse_cov: cov,
        var_min,
        var_max,
        theta_min,
        xi2: n * var_min / j2,
        xi2_anti: n * var_max / j2,
        qfi_anti,
        uncertainty_product: var_min * var_max / (j2 / 4.0),
    })
}

/// `ξ²(θ)` sampled every `step_deg` degrees on `[0°, 180°)`.
pub fn theta_scan(report: &SqueezingReport, step_deg: f64) -> Vec<(f64, f64)> {
    let steps = (180.0 / step_deg).round() as usize;
    (0..steps)
        .map(|k| {
            let theta = (k as f64 * step_deg).to_radians();
            (theta, report.xi2_at(theta))
        })
        .collect()
}

/// Quantum Fisher information of `state` for the Hermitian `generator`:
/// `4 Var(G)` for pure states, `2 Σ (p_k − p_l)²/(p_k + p_l) |G_kl|²` otherwise.
pub fn qfi<'a>(state: impl Into<StateRef<'a>>, generator: &Operator) -> Result<f64> {
    let state = state.into();
    if generator.basis() != state.basis() {
        return Err(Error::BasisMismatch {
            left: generator.basis().to_string(),
            right: state.basis().to_string(),
        });
    }
    let dev = generator.hermitian_deviation();
    if dev > crate::operator::HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    match state {
        StateRef::Pure(psi) => {
            check_pure_norm(psi)?;
            let v = psi.amplitudes();
            let gv = generator.matvec(v);
            let mean = v.dotc(&gv).re;
            Ok(4.0 * (gv.norm_squared() - mean * mean))
        }
        StateRef::Mixed(rho) => {
            let (p, vecs) = linalg::hermitian_eigen(rho.matrix())?;
            let g = vecs.adjoint() * generator.mul_dense(&vecs);
            let mut total = 0.0;
            for k in 0..p.len() {
                let pk = p[k].max(0.0);
                for l in 0..p.len() {
                    let pl = p[l].max(0.0);
                    let s = pk + pl;
                    if s > QFI_EIGEN_TOL {
                        total += 2.0 * (pk - pl) * (pk - pl) / s * g[(k, l)].norm_sqr();
                    }
                }
            }
            Ok(total)
        }
    }
}

/// Two-site correlators `⟨SᵢˣSⱼˣ⟩` and `⟨SᵢʸSⱼʸ⟩` for `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCorrelations {
    pub pairs: Vec<(usize, usize)>,
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
}

impl PairCorrelations {
    pub fn mean_xx(&self) -> f64 {
        self.xx.iter().sum::<f64>() / self.xx.len().max(1) as f64
    }

    pub fn mean_yy(&self) -> f64 {
        self.yy.iter().sum::<f64>() / self.yy.len().max(1) as f64
    }

    /// Largest spread among pairs, zero for permutation-symmetric states.
    pub fn spread(&self) -> f64 {
        let spread = |v: &[f64]| {
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - v.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if self.pairs.is_empty() {
            0.0
        } else {
            spread(&self.xx).max(spread(&self.yy))
        }
    }
}

/// Needs site-resolved operators, so only tensor-product states are accepted.
pub fn pair_correlations<'a>(
    state: impl Into<StateRef<'a>>,
    sites: &SiteOperatorSet,
) -> Result<PairCorrelations> {
    let state = state.into();
    if state.basis().is_dicke() {
        return Err(Error::Unsupported(
            "pair correlations need the tensor-product basis".into(),
        ));
    }
    if sites.basis() != state.basis() {
        return Err(Error::BasisMismatch {
            left: sites.basis().to_string(),
            right: state.basis().to_string(),
        });
    }
    let n = sites.emitters();
    let expect2 = |a: &Operator, b: &Operator| -> f64 {
        match state {
            StateRef::Pure(psi) => {
                let v = psi.amplitudes();
                a.matvec(v).dotc(&b.matvec(v)).re
            }
            StateRef::Mixed(rho) => a.trace_product(&b.mul_dense(rho.matrix())).re,
        }
    };
    let mut out = PairCorrelations {
        pairs: Vec::new(),
        xx: Vec::new(),
        yy: Vec::new(),
    };
    for i in 0..n {
        for j in i + 1..n {
            let (si, sj) = (sites.site(i), sites.site(j));
            out.pairs.push((i, j));
            out.xx.push(expect2(&si.sx, &sj.sx));
            out.yy.push(expect2(&si.sy, &sj.sy));
        }
    }
    Ok(out)
}

/// First-order squeezing `ξ² = 1 − (8/N) max_θ Re F(θ)` with
/// `F(θ) = −λ⟨φ₀|(J⊥(θ))²|ψ₁⟩`, together with the maximizing `θ ∈ [0, π)`.
pub fn linear_xi2(pert: &PerturbedState, ops: &CollectiveOps) -> Result<(f64, f64)> {
    if ops.basis() != pert.basis() {
        return Err(Error::BasisMismatch {
            left: ops.basis().to_string(),
            right: pert.basis().to_string(),
        });
    }
    let phi0 = &pert.phi0;
    let psi1 = &pert.psi1 * C64::new(pert.lambda, 0.0);
    let xp = ops.jx.matvec(&psi1);
    let yp = ops.jy.matvec(&psi1);
    let x0 = ops.jx.matvec(phi0);
    let y0 = ops.jy.matvec(phi0);
    // ⟨φ₀|Jx²|ψ₁⟩, ⟨φ₀|Jy²|ψ₁⟩, ⟨φ₀|{Jx,Jy}|ψ₁⟩
    let a = x0.dotc(&xp).re;
    let b = y0.dotc(&yp).re;
    let c = (x0.dotc(&yp) + y0.dotc(&xp)).re;
    // Re F(θ) = −[a cos²θ + b sin²θ + c sinθ cosθ]
    let max_re_f = -(a + b) / 2.0 + 0.5 * ((a - b) * (a - b) + c * c).sqrt();
    let theta = (0.5 * (-c).atan2(b - a)).rem_euclid(PI) + 0.0; // no -0.0
    let theta = if (PI - theta) < 1e-15 { 0.0 } else { theta };
    Ok((1.0 - 8.0 / ops.emitters() as f64 * max_re_f, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::symmetric_ops;
    use crate::state::DensityMatrix;

    #[test]
    fn coherent_state_is_unsqueezed() {
        let ops = symmetric_ops(6).unwrap();
        let psi = PureState::ground(ops.basis().clone());
        let r = squeezing_report(&psi, &ops).unwrap();
        assert!((r.xi2 - 1.0).abs() < 1e-12);
        assert!((r.uncertainty_product - 1.0).abs() < 1e-12);
        assert!((r.qfi_anti - 6.0).abs() < 1e-12);
        let rho = DensityMatrix::from_pure(&psi);
        let rm = squeezing_report(&rho, &ops).unwrap();
        assert!((rm.qfi_anti - 6.0).abs() < 1e-10);
    }

    #[test]
    fn frame_for_down_spin() {
        let (e1, e2) = transverse_frame(&Vector3::new(0.0, 0.0, -3.0));
        assert!((e1 - Vector3::x()).norm() < 1e-15);
        assert!((e2 - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn maximally_mixed_state_has_no_mean_spin() {
        let ops = symmetric_ops(4).unwrap();
        let rho = DensityMatrix::maximally_mixed(ops.basis().clone());
        assert!(matches!(
            squeezing_report(&rho, &ops),
            Err(Error::VanishingMeanSpin { .. })
        ));
    }
}
