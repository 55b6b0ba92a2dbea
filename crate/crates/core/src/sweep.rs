//! Parameter sweeps producing CSV tables that compare the exact and
//! perturbative backends.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::checks::{perturb_check, CheckOptions};
use crate::error::{Error, Result};
use crate::lindblad::{steady_state, SolverConfig};
use crate::models::{
    build_dicke, build_tfi, build_xyz, Backend, BuiltModel, DickeParams, TfiParams, XyzParams,
};
use crate::perturbation::{dicke_observables, perturb_model, xyz_closed_form, Engine};
use crate::squeezing::{linear_xi2, squeezing_report};

/// Largest emitter count for which the exact tensor-product backend is run.
pub const MAX_EXACT_EMITTERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    XyzScan,
    AngleMap,
    TfiScan,
    DickeScan,
    PerturbCheck,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::XyzScan,
        Command::AngleMap,
        Command::TfiScan,
        Command::DickeScan,
        Command::PerturbCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::XyzScan => "xyz-scan",
            Command::AngleMap => "angle-map",
            Command::TfiScan => "tfi-scan",
            Command::DickeScan => "dicke-scan",
            Command::PerturbCheck => "perturb-check",
        }
    }

    /// `None` for `perturb-check`, whose header records the `model` key instead.
    fn model_label(&self) -> Option<&'static str> {
        match self {
            Command::XyzScan | Command::AngleMap => Some("dissipative-xyz"),
            Command::TfiScan => Some("dissipative-tfi"),
            Command::DickeScan => Some("driven-dicke"),
            Command::PerturbCheck => None,
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Exact,
    Pert,
    Both,
}

impl BackendChoice {
    pub fn exact(&self) -> bool {
        matches!(self, BackendChoice::Exact | BackendChoice::Both)
    }

    pub fn pert(&self) -> bool {
        matches!(self, BackendChoice::Pert | BackendChoice::Both)
    }
}

impl FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BackendChoice::Exact),
            "pert" => Ok(BackendChoice::Pert),
            "both" => Ok(BackendChoice::Both),
            _ => Err(Error::InvalidParameter(format!(
                "backend must be exact, pert or both, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendChoice::Exact => "exact",
            BackendChoice::Pert => "pert",
            BackendChoice::Both => "both",
        })
    }
}

/// A fixed value or a closed interval sampled at `steps` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Fixed(f64),
    Range(f64, f64),
}

impl Param {
    pub fn values(&self, steps: usize) -> Vec<f64> {
        match *self {
            Param::Fixed(v) => vec![v],
            Param::Range(a, b) => (0..steps)
                .map(|k| a + (b - a) * k as f64 / (steps - 1) as f64)
                .collect(),
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Param::Fixed(v) => v.is_finite(),
            Param::Range(a, b) => a.is_finite() && b.is_finite(),
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("not a number: {t:?}")))
        };
        match s.split_once(':') {
            Some((a, b)) => Ok(Param::Range(num(a)?, num(b)?)),
            None => Ok(Param::Fixed(num(s)?)),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Fixed(v) => write!(f, "{v}"),
            Param::Range(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

/// Which models `perturb-check` runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckModel {
    All,
    Xyz,
    Tfi,
    Dicke,
}

impl FromStr for CheckModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(CheckModel::All),
            "xyz" => Ok(CheckModel::Xyz),
            "tfi" => Ok(CheckModel::Tfi),
            "dicke" => Ok(CheckModel::Dicke),
            _ => Err(Error::InvalidParameter(format!(
                "model must be all, xyz, tfi or dicke, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for CheckModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckModel::All => "all",
            CheckModel::Xyz => "xyz",
            CheckModel::Tfi => "tfi",
            CheckModel::Dicke => "dicke",
        })
    }
}

/// Everything a sweep needs. Energies are in units of `γ` (XYZ, TFI) or `Γ` (Dicke).
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub command: Command,
    pub emitters: Vec<usize>,
    pub j_mean: Param,
    pub delta_j: Param,
    pub jx: Param,
    pub jy: Param,
    pub jz: f64,
    pub delta: Param,
    pub gamma: f64,
    /// Largest `Ω/Γ` of the Dicke sweep.
    pub omega_max: f64,
    pub steps: usize,
    pub backend: BackendChoice,
    pub out: Option<PathBuf>,
    /// GMRES relative tolerance of the exact solver.
    pub tol: f64,
    pub check_model: CheckModel,
    /// Ladder fault injected by `perturb-check`: `none`, `scale` or `misplace`.
    pub fault: String,
}

/// Keys accepted in config files and as flags.
pub const CONFIG_KEYS: [&str; 16] = [
    "n",
    "j-mean",
    "delta-j",
    "jx",
    "jy",
    "jz",
    "delta",
    "gamma",
    "omega-max",
    "steps",
    "backend",
    "out",
    "tol",
    "model",
    "fault",
    "command",
];

impl ScanConfig {
    pub fn defaults(command: Command) -> Self {
        let mut c = ScanConfig {
            command,
            emitters: vec![8],
            j_mean: Param::Fixed(-0.8),
            delta_j: Param::Range(-0.1, 0.1),
            jx: Param::Range(-0.1, 0.1),
            jy: Param::Fixed(0.0),
            jz: 1.0,
            delta: Param::Fixed(-6.0),
            gamma: 1.0,
            omega_max: 0.5,
            steps: 21,
            backend: BackendChoice::Both,
            out: None,
            tol: SolverConfig::default().gmres_tol,
            check_model: CheckModel::All,
            fault: "none".into(),
        };
        match command {
            Command::AngleMap => {
                c.jx = Param::Range(-2.0, 2.0);
                c.jy = Param::Range(-2.0, 2.0);
                c.steps = 9;
            }
            Command::DickeScan => {
                c.emitters = vec![50, 100, 200, 300];
                c.steps = 26;
            }
            Command::PerturbCheck => c.emitters = vec![],
            _ => {}
        }
        c
    }

    /// Applies `key=value` pairs on top of the command defaults.
    pub fn from_pairs<'a>(
        command: Command,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut c = Self::defaults(command);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{key}: not a number: {v:?}")))
        };
        match key {
            "n" => {
                self.emitters = value
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidParameter(format!("n: bad count {t:?}")))
                    })
                    .collect::<Result<_>>()?
            }
            "j-mean" => self.j_mean = value.parse()?,
            "delta-j" => self.delta_j = value.parse()?,
            "jx" => self.jx = value.parse()?,
            "jy" => self.jy = value.parse()?,
            "jz" => self.jz = num(value)?,
            "delta" => self.delta = value.parse()?,
            "gamma" => self.gamma = num(value)?,
            "omega-max" => self.omega_max = num(value)?,
            "steps" => {
                self.steps = value
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("steps: bad count {value:?}")))?
            }
            "backend" => self.backend = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "tol" => self.tol = num(value)?,
            "model" => self.check_model = value.parse()?,
            "fault" => {
                if !matches!(value, "none" | "scale" | "misplace") {
                    return Err(Error::InvalidParameter(format!(
                        "fault must be none, scale or misplace, got {value:?}"
                    )));
                }
                self.fault = value.into()
            }
            "command" => {
                let c: Command = value.parse()?;
                if c != self.command {
                    return Err(Error::InvalidParameter(format!(
                        "config is for {}, not {}",
                        c.name(),
                        self.command.name()
                    )));
                }
            }
            _ => return Err(Error::InvalidParameter(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "steps = {} must be at least 2",
                self.steps
            )));
        }
        let params = [self.j_mean, self.delta_j, self.jx, self.jy, self.delta];
        if !params.iter().all(Param::is_finite)
            || ![self.jz, self.gamma, self.omega_max, self.tol]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter("ranges must be finite".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-negative".into()));
        }
        if self.emitters.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter("n must be at least 2".into()));
        }
        Ok(())
    }

    /// `#`-prefixed lines recording the full configuration.
    pub fn header(&self) -> String {
        let n: Vec<String> = self.emitters.iter().map(|n| n.to_string()).collect();
        let mut lines = vec![format!("# steadysqueeze {}", self.command.name())];
        if let Some(label) = self.command.model_label() {
            lines.push(format!("# model={label}"));
        }
        lines.push(format!("# command={}", self.command.name()));
        lines.push(format!("# n={}", n.join(",")));
        let body: Vec<(&str, String)> = match self.command {
            Command::XyzScan => vec![
                ("j-mean", self.j_mean.to_string()),
                ("delta-j", self.delta_j.to_string()),
                ("jz", self.jz.to_string()),
                ("gamma", self.gamma.to_string()),
            ],
            Command::AngleMap => vec![
                ("jx", self.jx.to_string()),
                ("jy", self.jy.to_string()),
                ("jz", self.jz.to_string()),
                ("gamma", self.gamma.to_string()),
            ],
            Command::TfiScan => vec![
                ("jx", self.jx.to_string()),
                ("delta", self.delta.to_string()),
                ("gamma", self.gamma.to_string()),
            ],
            Command::DickeScan => vec![
                ("omega-max", self.omega_max.to_string()),
                ("gamma", self.gamma.to_string()),
            ],
            Command::PerturbCheck => vec![
                ("model", self.check_model.to_string()),
                ("fault", self.fault.clone()),
            ],
        };
        for (k, v) in body {
            lines.push(format!("# {k}={v}"));
        }
        lines.push(format!("# steps={}", self.steps));
        lines.push(format!("# backend={}", self.backend));
        lines.push(format!("# tol={:e}", self.tol));
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            gmres_tol: self.tol,
            ..SolverConfig::default()
        }
    }
}

/// Parses a plain-text `key=value` file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: expected key=value", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) if v.is_nan() => f.write_str("nan"),
            Cell::Num(v) => write!(f, "{v:.16e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Result table of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of column `name` (`NaN` for text cells).
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| r[k].as_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn text(&self, name: &str) -> Vec<String> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[k].to_string()).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(format!("{}{}", self.header, String::from_utf8_lossy(&body)))
    }
}

/// Runs the configured command.
pub fn run(config: &ScanConfig) -> Result<Table> {
    config.validate()?;
    match config.command {
        Command::XyzScan => xyz_scan(config),
        Command::AngleMap => angle_map(config),
        Command::TfiScan => tfi_scan(config),
        Command::DickeScan => dicke_scan(config),
        Command::PerturbCheck => {
            let opts = CheckOptions::from_config(config)?;
            let report = perturb_check(&opts);
            Ok(report.to_table(config.header()))
        }
    }
}

#[derive(Clone, Debug)]
struct ExactPoint {
    xi2: f64,
    theta: f64,
    purity: f64,
    phi: f64,
    residual: f64,
    method: &'static str,
    flagged: Option<String>,
}

impl ExactPoint {
    fn missing(reason: Option<String>) -> Self {
        ExactPoint {
            xi2: f64::NAN,
            theta: f64::NAN,
            purity: f64::NAN,
            phi: f64::NAN,
            residual: f64::NAN,
            method: "-",
            flagged: reason,
        }
    }
}

fn exact_point(model: Result<BuiltModel>, solver: &SolverConfig) -> ExactPoint {
    let attempt = || -> Result<ExactPoint> {
        let model = model?;
        let ss = steady_state(&model.lindblad, solver)?;
        let diag = ss.rho.diagnostics();
        let mut point = ExactPoint {
            xi2: f64::NAN,
            theta: f64::NAN,
            purity: diag.purity,
            phi: f64::NAN,
            residual: ss.report.residual,
            method: ss.report.method.name(),
            flagged: None,
        };
        if !diag.is_valid() {
            point.flagged = Some(format!("invalid density matrix: {diag:?}"));
        }
        if ss.report.unique == Some(false) {
            point.flagged = Some("degenerate steady state".into());
        }
        let r = squeezing_report(&ss.rho, &model.collective)?;
        point.xi2 = r.xi2;
        point.theta = r.theta_min;
        point.phi = r.mean_spin.z.atan2(r.mean_spin.y);
        Ok(point)
    };
    attempt().unwrap_or_else(|e| ExactPoint::missing(Some(format!("solver-failed: {e}"))))
}

fn pert_linear(model: Result<BuiltModel>) -> Result<(f64, f64)> {
    let model = model?;
    let s = perturb_model(&model.lindblad, Engine::General)?;
    linear_xi2(&s, &model.collective)
}

fn status(messages: &[Option<String>]) -> Cell {
    let flagged: Vec<&str> = messages.iter().flatten().map(|s| s.as_str()).collect();
    if flagged.is_empty() {
        Cell::Text("ok".into())
    } else {
        Cell::Text(format!("flagged: {}", flagged.join("; ")).replace(['\n', ','], " "))
    }
}

fn backend_label(exact: bool, pert: bool) -> Cell {
    Cell::Text(
        match (exact, pert) {
            (true, true) => "exact+pert",
            (true, false) => "exact",
            (false, true) => "pert",
            (false, false) => "-",
        }
        .into(),
    )
}

/// `(exact wanted, exact allowed, reason)` for `n` emitters on the tensor-product space.
fn exact_gate(config: &ScanConfig, n: usize) -> (bool, Option<String>) {
    if !config.backend.exact() {
        return (false, None);
    }
    if n > MAX_EXACT_EMITTERS {
        return (
            false,
            Some(format!("exact backend needs N <= {MAX_EXACT_EMITTERS}")),
        );
    }
    (true, None)
}

fn single_n(config: &ScanConfig) -> Result<usize> {
    match config.emitters.as_slice() {
        [n] => Ok(*n),
        _ => Err(Error::InvalidParameter(format!(
            "{} takes exactly one emitter count",
            config.command.name()
        ))),
    }
}

struct PointOut {
    exact: ExactPoint,
    pert: (f64, f64),
    pert_flag: Option<String>,
}

fn evaluate(
    config: &ScanConfig,
    n: usize,
    exact_model: impl Fn() -> Result<BuiltModel>,
    pert_model: impl Fn() -> Result<BuiltModel>,
) -> PointOut {
    let (run_exact, gate) = exact_gate(config, n);
    let exact = if run_exact {
        exact_point(exact_model(), &config.solver())
    } else {
        ExactPoint::missing(gate)
    };
    let (pert, pert_flag) = if config.backend.pert() {
        match pert_linear(pert_model()) {
            Ok(v) => (v, None),
            Err(e) => ((f64::NAN, f64::NAN), Some(format!("pert-failed: {e}"))),
        }
    } else {
        ((f64::NAN, f64::NAN), None)
    };
    PointOut {
        exact,
        pert,
        pert_flag,
    }
}

/// ξ² and squeezing angle against `δ𝒥` at fixed `𝒥`, `𝒥z`.
pub fn xyz_scan(config: &ScanConfig) -> Result<Table> {
    let n = single_n(config)?;
    let j_mean = match config.j_mean {
        Param::Fixed(v) => v,
        Param::Range(..) => {
            return Err(Error::InvalidParameter(
                "xyz-scan sweeps delta-j; j-mean must be fixed".into(),
            ))
        }
    };
    let points = config.delta_j.values(config.steps);
    let rows = points
        .par_iter()
        .map(|&dj| {
            let p = XyzParams::from_mean(n, j_mean, dj, config.jz, config.gamma);
            let out = evaluate(
                config,
                n,
                || build_xyz(&p, Backend::Full),
                || build_xyz(&p, Backend::Perturbative),
            );
            vec![
                Cell::Num(dj),
                Cell::Num(out.exact.xi2),
                Cell::Num(out.pert.0),
                Cell::Num(out.exact.theta),
                Cell::Num(out.pert.1),
                Cell::Num(out.exact.purity),
                backend_label(out.exact.method != "-", config.backend.pert()),
                Cell::Text(out.exact.method.into()),
                Cell::Num(out.exact.residual),
                status(&[out.exact.flagged, out.pert_flag]),
            ]
        })
        .collect();
    Ok(Table {
        header: config.header(),
        columns: vec![
            "delta_J",
            "xi2_exact",
            "xi2_pert",
            "theta_min_exact",
            "theta_min_pert",
            "purity",
            "backend",
            "method",
            "residual",
            "status",
        ],
        rows,
    })
}

/// Quadrant of the `(δ𝒥, 𝒥 − 𝒥z)` plane: I `(+,+)`, II `(+,−)`, III `(−,−)`, IV `(−,+)`.
pub fn quadrant(delta_j: f64, j_minus_jz: f64) -> &'static str {
    match (delta_j.partial_cmp(&0.0), j_minus_jz.partial_cmp(&0.0)) {
        (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Greater)) => "I",
        (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Less)) => "II",
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Less)) => "III",
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Greater)) => "IV",
        _ => "boundary",
    }
}

/// Optimal squeezing angle over the `(𝒥x, 𝒥y)` plane.
pub fn angle_map(config: &ScanConfig) -> Result<Table> {
    let n = single_n(config)?;
    let xs = config.jx.values(config.steps);
    let ys = config.jy.values(config.steps);
    let grid: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(jx, jy)| {
            let p = XyzParams {
                emitters: n,
                jx,
                jy,
                jz: config.jz,
                gamma: config.gamma,
            };
            let dj = p.delta_j();
            let jmz = p.j_mean() - p.jz;
            let (run_exact, gate) = exact_gate(config, n);
            let exact = if run_exact {
                exact_point(build_xyz(&p, Backend::Full), &config.solver())
            } else {
                ExactPoint::missing(gate)
            };
            let mut flags = vec![exact.flagged.clone()];
            let (theta_pert, xi2_pert) = if !config.backend.pert() {
                (f64::NAN, f64::NAN)
            } else if dj == 0.0 {
                flags.push(Some("undefined angle: alpha = 0".into()));
                (f64::NAN, 1.0)
            } else {
                match xyz_closed_form(&p) {
                    Ok(cf) => (cf.theta_squeeze(), cf.xi2_linear_min()),
                    Err(e) => {
                        flags.push(Some(format!("pert-failed: {e}")));
                        (f64::NAN, f64::NAN)
                    }
                }
            };
            vec![
                Cell::Num(jx),
                Cell::Num(jy),
                Cell::Num(dj),
                Cell::Num(jmz),
                Cell::Text(quadrant(dj, jmz).into()),
                Cell::Num(theta_pert),
                Cell::Num(exact.theta),
                Cell::Num(xi2_pert),
                Cell::Num(exact.xi2),
                backend_label(exact.method != "-", config.backend.pert()),
                Cell::Text(exact.method.into()),
                Cell::Num(exact.residual),
                status(&flags),
            ]
        })
        .collect();
    Ok(Table {
        header: config.header(),
        columns: vec![
            "J_x",
            "J_y",
            "delta_J",
            "J_minus_Jz",
            "quadrant",
            "theta_pert",
            "theta_exact",
            "xi2_pert",
            "xi2_exact",
            "backend",
            "method",
            "residual",
            "status",
        ],
        rows,
    })
}

/// ξ² and squeezing angle against `𝒥x`, for one or several `Δ`.
pub fn tfi_scan(config: &ScanConfig) -> Result<Table> {
    let n = single_n(config)?;
    let grid: Vec<(f64, f64)> = config
        .delta
        .values(config.steps)
        .into_iter()
        .flat_map(|d| {
            config
                .jx
                .values(config.steps)
                .into_iter()
                .map(move |x| (d, x))
        })
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(delta, jx)| {
            let p = TfiParams {
                emitters: n,
                jx,
                delta,
                gamma: config.gamma,
            };
            let out = evaluate(
                config,
                n,
                || build_tfi(&p, Backend::Full),
                || build_tfi(&p, Backend::Perturbative),
            );
            vec![
                Cell::Num(delta),
                Cell::Num(jx),
                Cell::Num(out.exact.xi2),
                Cell::Num(out.pert.0),
                Cell::Num(out.exact.theta),
                Cell::Num(out.pert.1),
                Cell::Num(out.exact.purity),
                backend_label(out.exact.method != "-", config.backend.pert()),
                Cell::Text(out.exact.method.into()),
                Cell::Num(out.exact.residual),
                status(&[out.exact.flagged, out.pert_flag]),
            ]
        })
        .collect();
    Ok(Table {
        header: config.header(),
        columns: vec![
            "Delta",
            "J_x",
            "xi2_exact",
            "xi2_pert",
            "theta_min_exact",
            "theta_min_pert",
            "purity",
            "backend",
            "method",
            "residual",
            "status",
        ],
        rows,
    })
}

/// ξ² against `2Ω/Γ` for each requested `N`, exact in the Dicke manifold.
pub fn dicke_scan(config: &ScanConfig) -> Result<Table> {
    let ratios = Param::Range(0.0, config.omega_max).values(config.steps);
    let grid: Vec<(usize, f64)> = config
        .emitters
        .iter()
        .flat_map(|&n| ratios.iter().map(move |&r| (n, r)))
        .collect();
    let big_gamma = if config.gamma > 0.0 {
        config.gamma
    } else {
        1.0
    };
    let rows = grid
        .par_iter()
        .map(|&(n, ratio)| {
            let p = DickeParams {
                emitters: n,
                omega: ratio * big_gamma,
                big_gamma,
            };
            let exact = if config.backend.exact() {
                exact_point(build_dicke(&p), &config.solver())
            } else {
                ExactPoint::missing(None)
            };
            let (xi2_pert, phi_pert) = match (config.backend.pert(), dicke_observables(&p)) {
                (true, Ok(obs)) => (obs.xi2_min(), obs.sin_phi().atan2(obs.cos_phi())),
                _ => (f64::NAN, f64::NAN),
            };
            let mut flags = vec![exact.flagged.clone()];
            if 2.0 * ratio >= 1.0 {
                flags.push(Some("beyond super-radiant point 2 Omega/Gamma = 1".into()));
            }
            vec![
                Cell::Int(n),
                Cell::Num(2.0 * ratio),
                Cell::Num(exact.xi2),
                Cell::Num(xi2_pert),
                Cell::Num(exact.phi),
                Cell::Num(phi_pert),
                Cell::Num(exact.purity),
                backend_label(exact.method != "-", config.backend.pert()),
                Cell::Text(exact.method.into()),
                Cell::Num(exact.residual),
                status(&flags),
            ]
        })
        .collect();
    Ok(Table {
        header: config.header(),
        columns: vec![
            "n",
            "two_omega_over_gamma",
            "xi2_exact",
            "xi2_pert",
            "phi_exact",
            "phi_pert",
            "purity",
            "backend",
            "method",
            "residual",
            "status",
        ],
        rows,
    })
}

/// Merges file pairs and flag pairs, flags last so they win.
pub fn merge_pairs(
    file: Vec<(String, String)>,
    flags: Vec<(String, String)>,
) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (k, v) in file.into_iter().chain(flags) {
        map.insert(k, v);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_parsing_and_sampling() {
        let p: Param = "-0.1:0.1".parse().unwrap();
        let v = p.values(21);
        assert_eq!(v.len(), 21);
        assert_eq!(v[10], 0.0);
        assert_eq!("2.5".parse::<Param>().unwrap(), Param::Fixed(2.5));
        assert!("x".parse::<Param>().is_err());
    }

    #[test]
    fn config_file_with_flag_override() {
        let file = parse_config_text("# comment\nn = 6\nsteps=3 # trailing\ngamma=2\n").unwrap();
        let flags = vec![("steps".to_string(), "5".to_string())];
        let map = merge_pairs(file, flags);
        let c = ScanConfig::from_pairs(
            Command::XyzScan,
            map.iter().map(|(k, v)| (k.as_str(), v.as_str())),
        )
        .unwrap();
        assert_eq!(c.emitters, vec![6]);
        assert_eq!(c.steps, 5);
        assert_eq!(c.gamma, 2.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ScanConfig::from_pairs(Command::XyzScan, [("steps", "1")]).is_err());
        assert!(ScanConfig::from_pairs(Command::XyzScan, [("jz", "inf")]).is_err());
        assert!(ScanConfig::from_pairs(Command::XyzScan, [("bogus", "1")]).is_err());
        assert!(parse_config_text("no equals sign").is_err());
    }

    #[test]
    fn quadrant_labels() {
        assert_eq!(quadrant(0.1, 1.0), "I");
        assert_eq!(quadrant(0.1, -1.0), "II");
        assert_eq!(quadrant(-0.1, -1.0), "III");
        assert_eq!(quadrant(-0.1, 1.0), "IV");
        assert_eq!(quadrant(0.0, 1.0), "boundary");
    }

    #[test]
    fn cells_use_seventeen_significant_digits() {
        assert_eq!(Cell::Num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(f64::NAN).to_string(), "nan");
    }
}
