//! Pure-state perturbation theory for Lindblad steady states.
//!
//! The steady state is sought as `|φ₀'⟩ = |φ₀⟩ + λ|ψ₁⟩ + λ²|ψ₂⟩` with
//! `|ψ₁⟩ = Σ_{n≠0} cₙ|φₙ⟩` and `|ψ₂⟩ = −½⟨ψ₁|ψ₁⟩|φ₀⟩ + Σ_{n≠0} dₙ|φₙ⟩`,
//! where `{|φₙ⟩}` is the eigenbasis of `H0` and `|φ₀⟩` is annihilated by every
//! jump operator.

mod closed_form;

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use closed_form::{
    dicke_observables, tfi_closed_form, xyz_closed_form, ClosedForm, DickeObservables,
};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ZERO};
use crate::lindblad::{Jump, LindbladModel};
use crate::operator::{HilbertBasis, Operator};
use crate::state::PureState;

/// Energies closer than this (relative to `max(1, |E|)`) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Eigenbasis of `H0`, with degenerate blocks rotated to diagonalize `G = Σⱼ γⱼ Lⱼ†Lⱼ`.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    basis: Arc<HilbertBasis>,
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub states: DMatrix<C64>,
    pub index0: usize,
    /// `⟨φₙ|G|φₙ⟩`, present when `‖[G, H0]‖_max < 1e-10`.
    pub dissipator_diag: Option<Vec<C64>>,
    /// `G` in the eigenbasis.
    g_eigen: DMatrix<C64>,
}

impl Eigensystem {
    /// Eigensystem of `model.h0()` with the model's (effective) jumps.
    pub fn from_model(model: &LindbladModel) -> Result<Self> {
        Self::new(
            model.h0(),
            &model.dissipator_sum(),
            &model.effective_jumps(),
        )
    }

    /// `g` must equal `Σⱼ γⱼ Lⱼ†Lⱼ` on the states the perturbation reaches.
    pub fn new(h0: &Operator, g: &Operator, jumps: &[Jump]) -> Result<Self> {
        let basis = h0.basis().clone();
        let h = h0.to_dense();
        let gd = g.to_dense();
        let (energies, mut states) = linalg::hermitian_eigen(&h)?;
        let dim = energies.len();

        // rotate each degenerate block onto eigenvectors of G
        let mut start = 0;
        while start < dim {
            let mut end = start + 1;
            while end < dim
                && (energies[end] - energies[start]).abs()
                    <= DEGENERACY_TOL * energies[start].abs().max(1.0)
            {
                end += 1;
            }
            if end - start > 1 {
                let block = states.columns(start, end - start).into_owned();
                let gb = block.adjoint() * &gd * &block;
                let (_, rot) = linalg::hermitian_eigen(&gb)?;
                let rotated = &block * rot;
                states.columns_mut(start, end - start).copy_from(&rotated);
            }
            start = end;
        }
        fix_phases(&mut states);

        let orth =
            linalg::max_abs_diff(&(states.adjoint() * &states), &DMatrix::identity(dim, dim));
        if orth > 1e-10 {
            return Err(Error::LinearAlgebra(format!(
                "eigenvectors not orthonormal ({orth:.3e})"
            )));
        }
        let hv = &h * &states;
        for (n, &e) in energies.iter().enumerate() {
            let dev =
                linalg::max_modulus((hv.column(n) - states.column(n) * C64::new(e, 0.0)).iter());
            if dev > 1e-8 {
                return Err(Error::LinearAlgebra(format!(
                    "eigenpair {n} residual {dev:.3e}"
                )));
            }
        }

        let g_eigen = states.adjoint() * &gd * &states;
        let gscale = linalg::max_abs(&gd).max(1.0);
        let dark: Vec<usize> = (0..dim)
            .filter(|&n| {
                g_eigen[(n, n)].re.abs() < 1e-10 * gscale
                    && jumps.iter().all(|j| {
                        j.rate == 0.0 || j.op.matvec(&states.column(n).into_owned()).norm() < 1e-8
                    })
            })
            .collect();
        let index0 = match dark.as_slice() {
            [only] => *only,
            [] => {
                return Err(Error::AssumptionViolated(
                    "no eigenstate of H0 is annihilated by all jump operators".into(),
                ))
            }
            many => {
                return Err(Error::AssumptionViolated(format!(
                    "{} eigenstates of H0 are annihilated by all jump operators; the unperturbed steady state is not unique",
                    many.len()
                )))
            }
        };

        let commutes = {
            let c = &gd * &h - &h * &gd;
            linalg::max_abs(&c) < 1e-10
        };
        let dissipator_diag = commutes.then(|| (0..dim).map(|n| g_eigen[(n, n)]).collect());
        Ok(Self {
            basis,
            energies,
            states,
            index0,
            dissipator_diag,
            g_eigen,
        })
    }

    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn phi0(&self) -> DVector<C64> {
        self.states.column(self.index0).into_owned()
    }

    /// `⟨H0^(NH)⟩ₙ = Eₙ − (i/2)⟨φₙ|G|φₙ⟩`.
    pub fn nh_energy(&self, n: usize) -> C64 {
        C64::new(self.energies[n], 0.0) - I * 0.5 * self.g_eigen[(n, n)]
    }

    /// `‖[G, H0]‖_max < 1e-10`.
    pub fn commuting(&self) -> bool {
        self.dissipator_diag.is_some()
    }

    fn to_eigen(&self, op: &Operator) -> DMatrix<C64> {
        self.states.adjoint() * op.mul_dense(&self.states)
    }
}

/// Makes the largest-magnitude component of each column real and positive.
fn fix_phases(states: &mut DMatrix<C64>) {
    for mut col in states.column_iter_mut() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_mag + 1e-12 {
                best = i;
                best_mag = z.norm();
            }
        }
        let phase = col[best] / col[best].norm();
        col /= phase;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Coupled linear systems for `cₙ`, `dₙ`.
    General,
    /// Closed forms valid when `G` commutes with `H0`.
    Commuting,
}

/// `|φ₀⟩`, `|ψ₁⟩`, `|ψ₂⟩` per unit coupling, with the model coupling `lambda`.
#[derive(Clone, Debug)]
pub struct PerturbedState {
    basis: Arc<HilbertBasis>,
    pub phi0: DVector<C64>,
    pub psi1: DVector<C64>,
    pub psi2: DVector<C64>,
    pub lambda: f64,
    pub order: usize,
    /// Coefficients on the eigenbasis; `c[index0] = 0`.
    pub c: DVector<C64>,
    /// `d[index0] = −½⟨ψ₁|ψ₁⟩`.
    pub d: DVector<C64>,
    pub index0: usize,
    /// Largest residual of the linear systems behind `c` and `d`.
    pub residual: f64,
}

impl PerturbedState {
    pub fn basis(&self) -> &Arc<HilbertBasis> {
        &self.basis
    }

    /// Same corrections truncated at `order` (1 or 2).
    pub fn truncated(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.order = order.min(self.order);
        if out.order < 2 {
            out.psi2 = DVector::zeros(self.psi2.len());
        }
        out
    }

    /// `|φ₀⟩ + λ|ψ₁⟩ + λ²|ψ₂⟩`, unnormalized.
    pub fn at_lambda(&self, lambda: f64) -> DVector<C64> {
        let mut v = self.phi0.clone();
        v.axpy(C64::new(lambda, 0.0), &self.psi1, C64::new(1.0, 0.0));
        if self.order >= 2 {
            v.axpy(
                C64::new(lambda * lambda, 0.0),
                &self.psi2,
                C64::new(1.0, 0.0),
            );
        }
        v
    }

    /// Normalized state at the stored coupling.
    pub fn state(&self) -> Result<PureState> {
        self.state_at(self.lambda)
    }

    pub fn state_at(&self, lambda: f64) -> Result<PureState> {
        PureState::normalized(self.basis.clone(), self.at_lambda(lambda))
    }
}

/// Runs `engine` on `model`'s `H0`, `H1` and jumps; `λ` is taken from the model.
pub fn perturb_model(model: &LindbladModel, engine: Engine) -> Result<PerturbedState> {
    let eig = Eigensystem::from_model(model)?;
    let jumps = model.effective_jumps();
    let mut out = match engine {
        Engine::General => perturb_general(&eig, model.h1(), &jumps)?,
        Engine::Commuting => perturb_commuting(&eig, model.h1(), &jumps)?,
    };
    out.lambda = model.lambda();
    Ok(out)
}

/// Indices reachable from `seeds` through non-zero off-diagonal entries of `a`, excluding `skip`.
fn coupled_sector(seeds: &[usize], a: &DMatrix<C64>, skip: usize, tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    seen[skip] = true;
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    let mut out = Vec::new();
    while let Some(i) = queue.pop_front() {
        out.push(i);
        for j in 0..n {
            if !seen[j] && (a[(i, j)].norm() > tol || a[(j, i)].norm() > tol) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Solves `Σ_m A_nm x_m = b_n` for `n, m ≠ index0`, restricted to the sector
/// coupled to the support of `b`. Returns the solution and its residual.
fn solve_sector(a: &DMatrix<C64>, b: &DVector<C64>, index0: usize) -> Result<(DVector<C64>, f64)> {
    let dim = b.len();
    let bscale = linalg::max_modulus(b.iter());
    let mut x = DVector::zeros(dim);
    if bscale == 0.0 {
        return Ok((x, 0.0));
    }
    let ascale = linalg::max_abs(a).max(1.0);
    let seeds: Vec<usize> = (0..dim)
        .filter(|&n| n != index0 && b[n].norm() > 1e-13 * bscale)
        .collect();
    let sector = coupled_sector(&seeds, &offdiag(a), index0, 1e-14 * ascale);
    let k = sector.len();
    let sub = DMatrix::from_fn(k, k, |i, j| a[(sector[i], sector[j])]);
    let rhs = DVector::from_fn(k, |i, _| b[sector[i]]);
    let lu = sub.clone().lu();
    let u = lu.u();
    if let Some((pos, mag)) = (0..k)
        .map(|i| (i, u[(i, i)].norm()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        if mag < 1e-12 * ascale {
            return Err(Error::SingularPerturbation {
                index: sector[pos],
                magnitude: mag,
            });
        }
    }
    let sol = lu.solve(&rhs).ok_or(Error::SingularPerturbation {
        index: sector[0],
        magnitude: 0.0,
    })?;
    let residual = linalg::max_modulus((&sub * &sol - &rhs).iter());
    for (i, &n) in sector.iter().enumerate() {
        x[n] = sol[i];
    }
    Ok((x, residual))
}

fn offdiag(a: &DMatrix<C64>) -> DMatrix<C64> {
    let mut m = a.clone();
    m.fill_diagonal(ZERO);
    m
}

fn check_annihilation(eig: &Eigensystem, jumps: &[Jump]) -> Result<()> {
    let phi0 = eig.phi0();
    for (k, j) in jumps.iter().enumerate() {
        let n = j.op.matvec(&phi0).norm();
        if j.rate != 0.0 && n > 1e-8 {
            return Err(Error::AssumptionViolated(format!(
                "jump {k} does not annihilate φ₀ (‖Lφ₀‖ = {n:.3e})"
            )));
        }
    }
    Ok(())
}

/// `iΣⱼ γⱼ ⟨φₙ|Lⱼ|ψ₁⟩⟨ψ₁|Lⱼ†|φ₀⟩` for every `n`, in the eigenbasis.
fn jump_source(eig: &Eigensystem, jumps: &[Jump], psi1: &DVector<C64>) -> DVector<C64> {
    let phi0 = eig.phi0();
    let mut out = DVector::zeros(eig.dimension());
    for j in jumps.iter().filter(|j| j.rate != 0.0) {
        let l_psi1 = j.op.matvec(psi1);
        // ⟨ψ₁|L†|φ₀⟩ = conj(⟨φ₀|L|ψ₁⟩)
        let w = phi0.dotc(&l_psi1).conj();
        if w == ZERO {
            continue;
        }
        let proj = eig.states.adjoint() * l_psi1;
        out.axpy(I * j.rate * w, &proj, C64::new(1.0, 0.0));
    }
    out
}

/// Solves the coupled first- and second-order coefficient equations in the
/// eigenbasis of `H0`, with no assumption on the structure of `G`.
pub fn perturb_general(eig: &Eigensystem, h1: &Operator, jumps: &[Jump]) -> Result<PerturbedState> {
    check_annihilation(eig, jumps)?;
    let dim = eig.dimension();
    let z = eig.index0;
    let h1e = eig.to_eigen(h1);
    let e0 = eig.energies[z];
    let mut a = eig.g_eigen.map(|g| -I * 0.5 * g);
    for n in 0..dim {
        a[(n, n)] += C64::new(eig.energies[n] - e0, 0.0);
    }
    let mut b1 = -h1e.column(z).into_owned();
    b1[z] = ZERO;
    let (c, r1) = solve_sector(&a, &b1, z)?;
    let psi1 = &eig.states * &c;

    let h1_00 = h1e[(z, z)];
    let mut b2 = -(&h1e * &c - &c * h1_00 + jump_source(eig, jumps, &psi1));
    b2[z] = ZERO;
    let (mut d, r2) = solve_sector(&a, &b2, z)?;
    d[z] = C64::new(-0.5 * c.norm_squared(), 0.0);
    let psi2 = &eig.states * &d;
    Ok(PerturbedState {
        basis: eig.basis.clone(),
        phi0: eig.phi0(),
        psi1,
        psi2,
        lambda: 1.0,
        order: 2,
        c,
        d,
        index0: z,
        residual: r1.max(r2),
    })
}

/// Closed-form corrections for `[G, H0] = 0`: denominators are
/// `Dₙ = ⟨H0^(NH)⟩ₙ − E₀`.
pub fn perturb_commuting(
    eig: &Eigensystem,
    h1: &Operator,
    jumps: &[Jump],
) -> Result<PerturbedState> {
    if !eig.commuting() {
        return Err(Error::AssumptionViolated(
            "Σⱼ γⱼ Lⱼ†Lⱼ does not commute with H0".into(),
        ));
    }
    check_annihilation(eig, jumps)?;
    let dim = eig.dimension();
    let z = eig.index0;
    let h1e = eig.to_eigen(h1);
    let e0 = C64::new(eig.energies[z], 0.0);
    let den: Vec<C64> = (0..dim).map(|n| eig.nh_energy(n) - e0).collect();
    let scale = h1e.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1e-300);
    let divide = |num: C64, n: usize| -> Result<C64> {
        if num.norm() <= 1e-13 * scale {
            return Ok(ZERO);
        }
        if den[n].norm() < 1e-12 {
            return Err(Error::SingularPerturbation {
                index: n,
                magnitude: den[n].norm(),
            });
        }
        Ok(num / den[n])
    };

    let mut c = DVector::zeros(dim);
    for n in (0..dim).filter(|&n| n != z) {
        c[n] = -divide(h1e[(n, z)], n)?;
    }
    let psi1 = &eig.states * &c;
    let h1_00 = h1e[(z, z)];
    let jump = jump_source(eig, jumps, &psi1);
    let mut d = DVector::zeros(dim);
    for n in (0..dim).filter(|&n| n != z) {
        // Σ_m H1_nm H1_m0 / (Dₙ D_m)
        let mut t1 = ZERO;
        for m in (0..dim).filter(|&m| m != z) {
            if c[m] != ZERO {
                t1 += h1e[(n, m)] * h1e[(m, z)] / den[m];
            }
        }
        let t1 = divide(t1, n)?;
        let t2 = -h1_00 * divide(divide(h1e[(n, z)], n)?, n)?;
        let t4 = -divide(jump[n], n)?;
        d[n] = t1 + t2 + t4;
    }
    // −½ Σₙ |H1_n0|² / |Dₙ|²
    d[z] = C64::new(-0.5 * c.norm_squared(), 0.0);
    let psi2 = &eig.states * &d;
    Ok(PerturbedState {
        basis: eig.basis.clone(),
        phi0: eig.phi0(),
        psi1,
        psi2,
        lambda: 1.0,
        order: 2,
        c,
        d,
        index0: z,
        residual: 0.0,
    })
}

/// Largest coefficient difference between two perturbative results.
pub fn coefficient_delta(a: &PerturbedState, b: &PerturbedState) -> f64 {
    let dc = linalg::max_modulus((&a.c - &b.c).iter());
    let dd = linalg::max_modulus((&a.d - &b.d).iter());
    dc.max(dd)
}
