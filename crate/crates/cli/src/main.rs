use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use steadysqueeze::sweep::{merge_pairs, parse_config_text, run, Command as SweepCommand};
use steadysqueeze::ScanConfig;

/// Steady-state spin squeezing sweeps.
#[derive(Parser)]
#[command(name = "steadysqueeze", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Squeezing versus δJ for the dissipative XYZ model.
    XyzScan(Flags),
    /// Squeezing angle over a (Jx, Jy) grid.
    AngleMap(Flags),
    /// Squeezing versus Jx for the transverse-field Ising model.
    TfiScan(Flags),
    /// Squeezing versus drive for the driven Dicke model.
    DickeScan(Flags),
    /// Invariant checks on the perturbative engines.
    PerturbCheck(Flags),
}

/// Ranges are written `a:b` and sampled at `--steps` points.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Emitter count, or a comma-separated list.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    jx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    jy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    jz: Option<String>,
    /// Mean coupling (Jx + Jy)/2 of the XYZ scan.
    #[arg(long = "j-mean", allow_hyphen_values = true)]
    j_mean: Option<String>,
    /// Anisotropy Jx − Jy of the XYZ scan.
    #[arg(long = "delta-j", allow_hyphen_values = true)]
    delta_j: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Largest Ω/Γ of the Dicke scan.
    #[arg(long = "omega-max")]
    omega_max: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// exact, pert or both.
    #[arg(long)]
    backend: Option<String>,
    /// Relative tolerance of the iterative solver.
    #[arg(long)]
    tol: Option<String>,
    /// Model for perturb-check: all, xyz, tfi or dicke.
    #[arg(long)]
    model: Option<String>,
    /// Fault injected by perturb-check: none, scale or misplace.
    #[arg(long)]
    fault: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of key=value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("n", &self.n),
            ("jx", &self.jx),
            ("jy", &self.jy),
            ("jz", &self.jz),
            ("j-mean", &self.j_mean),
            ("delta-j", &self.delta_j),
            ("delta", &self.delta),
            ("gamma", &self.gamma),
            ("omega-max", &self.omega_max),
            ("steps", &self.steps),
            ("backend", &self.backend),
            ("tol", &self.tol),
            ("model", &self.model),
            ("fault", &self.fault),
        ];
        let mut out: Vec<(String, String)> = fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if let Some(p) = &self.out {
            out.push(("out".into(), p.display().to_string()));
        }
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (command, flags) = match cli.command {
        Cmd::XyzScan(f) => (SweepCommand::XyzScan, f),
        Cmd::AngleMap(f) => (SweepCommand::AngleMap, f),
        Cmd::TfiScan(f) => (SweepCommand::TfiScan, f),
        Cmd::DickeScan(f) => (SweepCommand::DickeScan, f),
        Cmd::PerturbCheck(f) => (SweepCommand::PerturbCheck, f),
    };
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            parse_config_text(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Vec::new(),
    };
    let merged = merge_pairs(file, flags.pairs());
    let config = ScanConfig::from_pairs(
        command,
        merged.iter().map(|(k, v)| (k.as_str(), v.as_str())),
    )?;

    // fail before a long sweep rather than after it
    let mut sink: Box<dyn Write> = match &config.out {
        Some(path) => {
            Box::new(fs::File::create(path).with_context(|| format!("opening {}", path.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };

    let table = run(&config)?;
    sink.write_all(table.to_csv()?.as_bytes())?;
    sink.flush()?;

    let flagged = table
        .text("status")
        .iter()
        .chain(table.text("result").iter())
        .filter(|s| s.starts_with("flagged") || s.as_str() == "FAIL")
        .count();
    if flagged > 0 {
        eprintln!("{flagged} of {} rows flagged or failing", table.rows.len());
    }
    Ok(())
}
