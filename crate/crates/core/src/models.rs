//! The three benchmark models: dissipative XYZ, dissipative transverse-field
//! Ising and the driven Dicke model.
//!
//! Units: `γ = 1` for XYZ and TFI, `Γ = 1` for Dicke, unless a different rate
//! is passed explicitly. Coupling constants that break the `Jz` symmetry are
//! folded into `H1` and the coupling `λ` is set to 1.

use std::fmt;

use crate::dicke::{symmetric_ops, CollectiveOps};
use crate::error::{Error, Result};
use crate::full_basis::{site_ops, SiteOperatorSet, MAX_SITE_EMITTERS};
use crate::linalg::C64;
use crate::lindblad::{Dissipation, Jump, LindbladModel};
use crate::operator::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Tensor-product space with one jump `Sᵢ⁻` per emitter.
    Full,
    /// Symmetric Dicke manifold with individual emission entering through
    /// `Σᵢ Sᵢ⁺Sᵢ⁻ = Jz + N/2`; supports the perturbative engines only.
    Perturbative,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Full => "full",
            Backend::Perturbative => "perturbative",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XyzParams {
    pub emitters: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub gamma: f64,
}

impl XyzParams {
    /// From the mean coupling `𝒥` and anisotropy `δ𝒥`: `𝒥x = 𝒥 + δ𝒥`, `𝒥y = 𝒥 − δ𝒥`.
    pub fn from_mean(emitters: usize, j_mean: f64, delta_j: f64, jz: f64, gamma: f64) -> Self {
        Self {
            emitters,
            jx: j_mean + delta_j,
            jy: j_mean - delta_j,
            jz,
            gamma,
        }
    }

    pub fn j_mean(&self) -> f64 {
        (self.jx + self.jy) / 2.0
    }

    pub fn delta_j(&self) -> f64 {
        (self.jx - self.jy) / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TfiParams {
    pub emitters: usize,
    pub jx: f64,
    pub delta: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DickeParams {
    pub emitters: usize,
    pub omega: f64,
    pub big_gamma: f64,
}

/// A Lindblad model together with the collective spin operators of its basis.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub lindblad: LindbladModel,
    pub collective: CollectiveOps,
    /// Site operators, present for the full backend.
    pub sites: Option<SiteOperatorSet>,
    pub backend: Backend,
}

impl BuiltModel {
    pub fn emitters(&self) -> usize {
        self.collective.emitters()
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "non-finite model parameter in {values:?}"
        )))
    }
}

fn operators(
    emitters: usize,
    backend: Backend,
) -> Result<(CollectiveOps, Option<SiteOperatorSet>)> {
    match backend {
        Backend::Full => {
            if emitters > MAX_SITE_EMITTERS {
                return Err(Error::EmitterCountOutOfRange {
                    emitters,
                    min: 1,
                    max: MAX_SITE_EMITTERS,
                });
            }
            let sites = site_ops(emitters)?;
            Ok((sites.collective()?, Some(sites)))
        }
        Backend::Perturbative => Ok((symmetric_ops(emitters)?, None)),
    }
}

fn individual_emission(
    ops: &CollectiveOps,
    sites: &Option<SiteOperatorSet>,
    gamma: f64,
) -> Result<Dissipation> {
    Ok(match sites {
        Some(s) => Dissipation::Jumps(
            s.sites()
                .iter()
                .map(|site| Jump::new(site.sminus.clone(), gamma))
                .collect::<Result<_>>()?,
        ),
        None => Dissipation::ProjectedIndividual {
            gamma,
            jz: ops.jz.clone(),
            jminus: ops.jminus.clone(),
        },
    })
}

fn finish(
    h0: Operator,
    h1: Operator,
    dissipation: Dissipation,
    collective: CollectiveOps,
    sites: Option<SiteOperatorSet>,
    backend: Backend,
) -> Result<BuiltModel> {
    let lindblad = LindbladModel::with_dissipation(h0, h1, 1.0, dissipation)?
        .with_u1_symmetry(&collective.jz)?;
    Ok(BuiltModel {
        lindblad,
        collective,
        sites,
        backend,
    })
}

/// `H0 = (𝒥/N)(Jx² + Jy²) + (𝒥z/N)Jz²`, `H1 = (δ𝒥/2N)[(J⁺)² + (J⁻)²]`, jumps `Sᵢ⁻` at rate `γ`.
pub fn build_xyz(p: &XyzParams, backend: Backend) -> Result<BuiltModel> {
    let (ops, sites) = operators(p.emitters, backend)?;
    xyz_on(p, ops, sites, backend)
}

/// XYZ model on caller-supplied Dicke-manifold operators (perturbative backend).
pub fn build_xyz_from(p: &XyzParams, ops: CollectiveOps) -> Result<BuiltModel> {
    xyz_on(p, ops, None, Backend::Perturbative)
}

fn xyz_on(
    p: &XyzParams,
    ops: CollectiveOps,
    sites: Option<SiteOperatorSet>,
    backend: Backend,
) -> Result<BuiltModel> {
    check_finite(&[p.jx, p.jy, p.jz, p.gamma])?;
    let n = p.emitters as f64;
    let jx2 = &ops.jx * &ops.jx;
    let jy2 = &ops.jy * &ops.jy;
    let jz2 = &ops.jz * &ops.jz;
    let h0 = &(&jx2 + &jy2).scale(c(p.j_mean() / n)) + &jz2.scale(c(p.jz / n));
    let h1 = xyz_h1(p, &ops);
    let dissipation = individual_emission(&ops, &sites, p.gamma)?;
    finish(h0, h1, dissipation, ops, sites, backend)
}

/// `H0 = Δ Jz`, `H1 = (𝒥x/4N)[(J⁺)² + (J⁻)² + J⁺J⁻ + J⁻J⁺]`, jumps `Sᵢ⁻` at rate `γ`.
pub fn build_tfi(p: &TfiParams, backend: Backend) -> Result<BuiltModel> {
    let (ops, sites) = operators(p.emitters, backend)?;
    tfi_on(p, ops, sites, backend)
}

/// TFI model on caller-supplied Dicke-manifold operators (perturbative backend).
pub fn build_tfi_from(p: &TfiParams, ops: CollectiveOps) -> Result<BuiltModel> {
    tfi_on(p, ops, None, Backend::Perturbative)
}

fn tfi_on(
    p: &TfiParams,
    ops: CollectiveOps,
    sites: Option<SiteOperatorSet>,
    backend: Backend,
) -> Result<BuiltModel> {
    check_finite(&[p.jx, p.delta, p.gamma])?;
    let h0 = ops.jz.scale(c(p.delta));
    let h1 = tfi_h1(p, &ops);
    let dissipation = individual_emission(&ops, &sites, p.gamma)?;
    finish(h0, h1, dissipation, ops, sites, backend)
}

/// `H0 = 0`, `H1 = −Ω Jx`, one collective jump `J⁻` at rate `Γ/N`, on the
/// symmetric Dicke manifold.
pub fn build_dicke(p: &DickeParams) -> Result<BuiltModel> {
    let ops = symmetric_ops(p.emitters)?;
    build_dicke_on(p, ops, None, Backend::Perturbative)
}

/// The driven Dicke model on the full tensor-product space (collective jump
/// `Σᵢ Sᵢ⁻`); its steady state is unique only within each total-spin sector.
pub fn build_dicke_full(p: &DickeParams) -> Result<BuiltModel> {
    let (ops, sites) = operators(p.emitters, Backend::Full)?;
    build_dicke_on(p, ops, sites, Backend::Full)
}

/// Driven Dicke model on caller-supplied Dicke-manifold operators.
pub fn build_dicke_from(p: &DickeParams, ops: CollectiveOps) -> Result<BuiltModel> {
    build_dicke_on(p, ops, None, Backend::Perturbative)
}

fn build_dicke_on(
    p: &DickeParams,
    ops: CollectiveOps,
    sites: Option<SiteOperatorSet>,
    backend: Backend,
) -> Result<BuiltModel> {
    check_finite(&[p.omega, p.big_gamma])?;
    if !(p.big_gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Γ = {} must be positive",
            p.big_gamma
        )));
    }
    let n = p.emitters as f64;
    let h0 = Operator::zeros(ops.basis().clone());
    let h1 = dicke_h1(p, &ops);
    let jumps = vec![Jump::new(ops.jminus.clone(), p.big_gamma / n)?];
    finish(h0, h1, Dissipation::Jumps(jumps), ops, sites, backend)
}

/// `(δ𝒥/2N)[(J⁺)² + (J⁻)²]`.
pub fn xyz_h1(p: &XyzParams, ops: &CollectiveOps) -> Operator {
    let pp = &ops.jplus * &ops.jplus;
    let mm = &ops.jminus * &ops.jminus;
    (&pp + &mm).scale(c(p.delta_j() / (2.0 * p.emitters as f64)))
}

/// `(𝒥x/4N)[(J⁺)² + (J⁻)² + J⁺J⁻ + J⁻J⁺]`.
pub fn tfi_h1(p: &TfiParams, ops: &CollectiveOps) -> Operator {
    let pp = &ops.jplus * &ops.jplus;
    let mm = &ops.jminus * &ops.jminus;
    let pm = &ops.jplus * &ops.jminus;
    let mp = &ops.jminus * &ops.jplus;
    (&(&pp + &mm) + &(&pm + &mp)).scale(c(p.jx / (4.0 * p.emitters as f64)))
}

/// `−Ω Jx`.
pub fn dicke_h1(p: &DickeParams, ops: &CollectiveOps) -> Operator {
    ops.jx.scale(c(-p.omega))
}

/// `(1/N) Σᵢⱼ (𝒥x SᵢˣSⱼˣ + 𝒥y SᵢʸSⱼʸ + 𝒥z SᵢᶻSⱼᶻ)` built site by site.
pub fn xyz_direct_hamiltonian(p: &XyzParams) -> Result<Operator> {
    let sites = site_ops(p.emitters)?;
    let n = p.emitters as f64;
    let mut h = Operator::zeros(sites.basis().clone());
    for a in sites.sites() {
        for b in sites.sites() {
            let term = &(&(&a.sx * &b.sx).scale(c(p.jx)) + &(&a.sy * &b.sy).scale(c(p.jy)))
                + &(&a.sz * &b.sz).scale(c(p.jz));
            h = &h + &term;
        }
    }
    Ok(h.scale(c(1.0 / n)))
}

/// `(𝒥x/N) Σᵢⱼ SᵢˣSⱼˣ + Δ Σᵢ Sᵢᶻ` built site by site.
pub fn tfi_direct_hamiltonian(p: &TfiParams) -> Result<Operator> {
    let sites = site_ops(p.emitters)?;
    let n = p.emitters as f64;
    let mut h = Operator::zeros(sites.basis().clone());
    for a in sites.sites() {
        h = &h + &a.sz.scale(c(p.delta));
        for b in sites.sites() {
            h = &h + &(&a.sx * &b.sx).scale(c(p.jx / n));
        }
    }
    Ok(h)
}

/// `γ Σᵢ Sᵢ⁺Sᵢ⁻` compared against `γ(Jz + N/2)`; returns the max deviation.
pub fn individual_emission_identity_deviation(model: &BuiltModel, gamma: f64) -> Result<f64> {
    let n = model.emitters() as f64;
    let shift = Operator::identity(model.collective.basis().clone()).scale(c(n / 2.0));
    let expected = (&model.collective.jz + &shift).scale(c(gamma));
    model.lindblad.dissipator_sum().max_abs_diff(&expected)
}
