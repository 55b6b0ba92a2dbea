//! Invariant suite behind `perturb-check`: cross-engine agreement, sector
//! restriction, closed-form oracles and `λ`-scaling against the exact solver.

use nalgebra::DVector;

use crate::dicke::{collective_ops_from_table, CollectiveOps, DickeLadderTable, LadderFault};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::lindblad::{steady_state, LindbladModel, SolverConfig};
use crate::models::{
    build_dicke_from, build_tfi, build_tfi_from, build_xyz, build_xyz_from, dicke_h1, tfi_h1,
    xyz_h1, Backend, BuiltModel, DickeParams, TfiParams, XyzParams,
};
use crate::operator::commutator;
use crate::perturbation::{
    coefficient_delta, dicke_observables, perturb_model, tfi_closed_form, xyz_closed_form, Engine,
    PerturbedState,
};
use crate::sweep::{Cell, CheckModel, ScanConfig, Table, MAX_EXACT_EMITTERS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelId {
    Xyz,
    Tfi,
    Dicke,
}

impl ModelId {
    pub fn name(&self) -> &'static str {
        match self {
            ModelId::Xyz => "xyz",
            ModelId::Tfi => "tfi",
            ModelId::Dicke => "dicke",
        }
    }

    fn default_emitters(&self) -> usize {
        match self {
            ModelId::Xyz | ModelId::Tfi => 6,
            ModelId::Dicke => 10,
        }
    }

    /// Excitation numbers reached by `ψ₁` and `ψ₂` from `|↓…↓⟩`.
    fn sectors(&self) -> (&'static [usize], &'static [usize]) {
        match self {
            ModelId::Xyz | ModelId::Tfi => (&[2], &[0, 2, 4]),
            ModelId::Dicke => (&[1], &[0, 2]),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub models: Vec<(ModelId, usize)>,
    pub fault: Option<LadderFault>,
    pub solver: SolverConfig,
}

impl CheckOptions {
    pub fn new(models: Vec<(ModelId, usize)>) -> Self {
        CheckOptions {
            models,
            fault: None,
            solver: SolverConfig::default(),
        }
    }

    pub fn from_config(config: &ScanConfig) -> Result<Self> {
        let ids = match config.check_model {
            CheckModel::All => vec![ModelId::Xyz, ModelId::Tfi, ModelId::Dicke],
            CheckModel::Xyz => vec![ModelId::Xyz],
            CheckModel::Tfi => vec![ModelId::Tfi],
            CheckModel::Dicke => vec![ModelId::Dicke],
        };
        let n = match config.emitters.as_slice() {
            [] => None,
            [n] => Some(*n),
            _ => {
                return Err(Error::InvalidParameter(
                    "perturb-check takes at most one emitter count".into(),
                ))
            }
        };
        let mut opts = Self::new(
            ids.into_iter()
                .map(|id| (id, n.unwrap_or(id.default_emitters())))
                .collect(),
        );
        opts.fault = match config.fault.as_str() {
            "scale" => Some(LadderFault::Scale {
                index: 1,
                factor: 1.5,
            }),
            "misplace" => Some(LadderFault::Misplace { index: 0 }),
            _ => None,
        };
        opts.solver.gmres_tol = config.tol;
        Ok(opts)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub check: &'static str,
    pub model: &'static str,
    pub emitters: usize,
    pub measured: f64,
    pub threshold: f64,
    /// `"<"` when `measured` must stay below `threshold`, `">="` otherwise.
    pub comparison: &'static str,
    pub passed: bool,
    pub note: String,
}

impl CheckResult {
    fn below(check: &'static str, model: ModelId, n: usize, measured: f64, threshold: f64) -> Self {
        CheckResult {
            check,
            model: model.name(),
            emitters: n,
            measured,
            threshold,
            comparison: "<",
            passed: measured < threshold,
            note: String::new(),
        }
    }

    fn at_least(
        check: &'static str,
        model: ModelId,
        n: usize,
        measured: f64,
        threshold: f64,
    ) -> Self {
        CheckResult {
            comparison: ">=",
            passed: measured >= threshold,
            ..Self::below(check, model, n, measured, threshold)
        }
    }

    fn failed(check: &'static str, model: ModelId, n: usize, err: &Error) -> Self {
        CheckResult {
            check,
            model: model.name(),
            emitters: n,
            measured: f64::NAN,
            threshold: f64::NAN,
            comparison: "-",
            passed: false,
            note: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, check: &str, model: &str) -> Option<&CheckResult> {
        self.results
            .iter()
            .find(|r| r.check == check && r.model == model)
    }

    pub fn to_table(&self, header: String) -> Table {
        let rows = self
            .results
            .iter()
            .map(|r| {
                vec![
                    Cell::Text(r.check.into()),
                    Cell::Text(r.model.into()),
                    Cell::Int(r.emitters),
                    Cell::Num(r.measured),
                    Cell::Text(r.comparison.into()),
                    Cell::Num(r.threshold),
                    Cell::Text(if r.passed { "PASS" } else { "FAIL" }.into()),
                    Cell::Text(r.note.replace([',', '\n'], " ")),
                ]
            })
            .collect();
        Table {
            header,
            columns: vec![
                "check",
                "model",
                "n",
                "measured",
                "comparison",
                "threshold",
                "result",
                "note",
            ],
            rows,
        }
    }
}

/// Default weak couplings used by the suite.
pub fn xyz_check_params(n: usize) -> XyzParams {
    XyzParams::from_mean(n, -0.8, 0.02, 1.0, 1.0)
}

pub fn tfi_check_params(n: usize) -> TfiParams {
    TfiParams {
        emitters: n,
        jx: 0.02,
        delta: -2.0,
        gamma: 1.0,
    }
}

pub fn dicke_check_params(n: usize) -> DickeParams {
    DickeParams {
        emitters: n,
        omega: 0.05,
        big_gamma: 1.0,
    }
}

fn dicke_ops(n: usize, fault: Option<LadderFault>) -> Result<CollectiveOps> {
    let mut table = DickeLadderTable::new(n);
    if let Some(f) = fault {
        table = table.with_fault(f);
    }
    collective_ops_from_table(n, &table)
}

/// Model on the Dicke manifold; a ladder fault corrupts only the operators
/// entering `H1`, so the unperturbed problem stays intact.
fn manifold_model(id: ModelId, n: usize, fault: Option<LadderFault>) -> Result<BuiltModel> {
    let ops = dicke_ops(n, None)?;
    let clean = match id {
        ModelId::Xyz => build_xyz_from(&xyz_check_params(n), ops)?,
        ModelId::Tfi => build_tfi_from(&tfi_check_params(n), ops)?,
        ModelId::Dicke => build_dicke_from(&dicke_check_params(n), ops)?,
    };
    let Some(fault) = fault else {
        return Ok(clean);
    };
    let bad = dicke_ops(n, Some(fault))?;
    let h1 = match id {
        ModelId::Xyz => xyz_h1(&xyz_check_params(n), &bad),
        ModelId::Tfi => tfi_h1(&tfi_check_params(n), &bad),
        ModelId::Dicke => dicke_h1(&dicke_check_params(n), &bad),
    };
    let lm = &clean.lindblad;
    let lindblad = LindbladModel::with_dissipation(
        lm.h0().clone(),
        h1,
        lm.lambda(),
        lm.dissipation().clone(),
    )?
    .with_u1_symmetry(&clean.collective.jz)?;
    Ok(BuiltModel { lindblad, ..clean })
}

/// Largest amplitude outside the allowed excitation sectors.
pub fn sector_leak(
    state: &DVector<C64>,
    basis: &crate::operator::HilbertBasis,
    allowed: &[usize],
) -> f64 {
    state
        .iter()
        .enumerate()
        .filter(|(k, _)| !allowed.contains(&basis.excitations(*k)))
        .fold(0.0, |m, (_, z)| m.max(z.norm()))
}

/// Analytic perturbed amplitudes on the Dicke manifold (per unit coupling).
fn closed_form_deviation(id: ModelId, n: usize, s: &PerturbedState) -> Result<f64> {
    let mut expected = DVector::<C64>::zeros(s.psi1.len());
    match id {
        ModelId::Xyz => expected[2] = xyz_closed_form(&xyz_check_params(n))?.c2,
        ModelId::Tfi => expected[2] = tfi_closed_form(&tfi_check_params(n))?.c2,
        ModelId::Dicke => {
            let full = s.at_lambda(1.0);
            let c = dicke_observables(&dicke_check_params(n))?.state_coefficients();
            for (k, v) in c.iter().enumerate() {
                expected[k] = *v;
            }
            return Ok(linalg::max_modulus((&full - &expected).iter()));
        }
    }
    Ok(linalg::max_modulus((&s.psi1 - &expected).iter()))
}

/// `‖ρ_ss(λ) − |ψ(λ)⟩⟨ψ(λ)|‖_max` for the perturbative state truncated at `order`.
pub fn exact_distance(
    model: &BuiltModel,
    order: usize,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<f64> {
    let scaled = model.lindblad.with_lambda(lambda);
    let ss = steady_state(&scaled, solver)?;
    let pert = perturb_model(&scaled, Engine::General)?.truncated(order);
    let psi = pert.state()?;
    Ok(linalg::max_abs_diff(ss.rho.matrix(), &psi.projector()))
}

/// Ratio `err(λ)/err(λ/2)`; close to `2^(order+1)` when the expansion holds.
pub fn lambda_scaling_ratio(
    model: &BuiltModel,
    order: usize,
    solver: &SolverConfig,
) -> Result<f64> {
    let e1 = exact_distance(model, order, 1.0, solver)?;
    let e2 = exact_distance(model, order, 0.5, solver)?;
    Ok(e1 / e2)
}

fn check_model(id: ModelId, n: usize, opts: &CheckOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let model = match manifold_model(id, n, opts.fault) {
        Ok(m) => m,
        Err(e) => {
            out.push(CheckResult::failed("build", id, n, &e));
            return out;
        }
    };
    let lm = &model.lindblad;
    match commutator(&lm.dissipator_sum(), lm.h0()) {
        Ok(c) => out.push(CheckResult::below(
            "commuting_condition",
            id,
            n,
            c.max_abs(),
            1e-10,
        )),
        Err(e) => out.push(CheckResult::failed("commuting_condition", id, n, &e)),
    }
    let general = perturb_model(lm, Engine::General);
    let commuting = perturb_model(lm, Engine::Commuting);
    match (&general, &commuting) {
        (Ok(g), Ok(c)) => {
            out.push(CheckResult::below(
                "engine_agreement",
                id,
                n,
                coefficient_delta(g, c),
                1e-12,
            ));
            out.push(CheckResult::below(
                "linear_residual",
                id,
                n,
                g.residual,
                1e-12,
            ));
        }
        (Err(e), _) | (_, Err(e)) => out.push(CheckResult::failed("engine_agreement", id, n, e)),
    }
    if let Ok(g) = &general {
        let (s1, s2) = id.sectors();
        let leak = sector_leak(&g.psi1, lm.basis(), s1).max(sector_leak(&g.psi2, lm.basis(), s2));
        out.push(CheckResult::below("sector_restriction", id, n, leak, 1e-12));
        match closed_form_deviation(id, n, g) {
            Ok(d) => out.push(CheckResult::below("closed_form", id, n, d, 1e-12)),
            Err(e) => out.push(CheckResult::failed("closed_form", id, n, &e)),
        }
    }

    // λ-scaling against the exact solver: first order for XYZ/TFI on the
    // tensor-product space, second order for Dicke on its manifold
    let scaling = match id {
        ModelId::Xyz | ModelId::Tfi if n > MAX_EXACT_EMITTERS => None,
        ModelId::Xyz => Some(build_xyz(&xyz_check_params(n), Backend::Full).map(|m| (m, 1))),
        ModelId::Tfi => Some(build_tfi(&tfi_check_params(n), Backend::Full).map(|m| (m, 1))),
        ModelId::Dicke => Some(Ok((model.clone(), 2))),
    };
    match scaling {
        None => {}
        Some(Ok((m, order))) => {
            let threshold = if order == 1 { 3.5 } else { 7.0 };
            match lambda_scaling_ratio(&m, order, &opts.solver) {
                Ok(r) => out.push(CheckResult::at_least("lambda_scaling", id, n, r, threshold)),
                Err(e) => out.push(CheckResult::failed("lambda_scaling", id, n, &e)),
            }
        }
        Some(Err(e)) => out.push(CheckResult::failed("lambda_scaling", id, n, &e)),
    }
    out
}

/// Runs every check on every requested model; failures are report content.
pub fn perturb_check(opts: &CheckOptions) -> CheckReport {
    CheckReport {
        results: opts
            .models
            .iter()
            .flat_map(|&(id, n)| check_model(id, n, opts))
            .collect(),
    }
}
