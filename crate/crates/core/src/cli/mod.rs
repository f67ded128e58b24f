//! Command-line front end.

mod check;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analytic::closed_form_gaussian_large_u;
use crate::entropy::{compute_report, EntropyReport, ReportOptions};
use crate::error::{Error, Result};
use crate::kernels::GridSpec;
use crate::model::{box_for_veff, gaussian_for_veff, CompositeParams, EffectiveVolumes, WeightFunction};
use crate::phase_space::PhaseSpec;

pub use check::{run_checks, CheckOutcome};
pub use config::{parse_range, RunConfig, WeightKind};
pub use output::{format_sig, SweepRow};

#[derive(Debug, Parser)]
#[command(name = "composite-ee", version, about = "Entanglement entropies of a two-particle Gaussian composite")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every entropy at one parameter point.
    Point(CommonArgs),
    /// Sweep over lists of u and v_eff values and write CSV.
    Sweep(CommonArgs),
    /// The canonical sweep: gaussian weight, u in {1, 8}, v_eff = 0:8:33.
    Fig1(CommonArgs),
    /// Run the built-in oracle suite.
    Check {
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MutationArg {
    DropMeasure,
    FlipSign,
}

#[derive(Debug, Default, Clone, Args)]
pub struct CommonArgs {
    /// constant | gaussian | table:<path>
    #[arg(long)]
    pub weight: Option<String>,
    /// Mass ratio; a list `1,8` or range `lo:hi:count` for sweeps.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Effective volume; a list or `lo:hi:count` for sweeps.
    #[arg(long, allow_hyphen_values = true)]
    pub veff: Option<String>,
    /// Box length (instead of --veff).
    #[arg(long = "V")]
    pub big_v: Option<f64>,
    /// Gaussian weight width (instead of --veff).
    #[arg(long = "B")]
    pub big_b: Option<f64>,
    /// Position grid size of the density matrix.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Position window half-width.
    #[arg(long)]
    pub grid_l: Option<f64>,
    /// Phase-space grid size per axis.
    #[arg(long)]
    pub phase_n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skip the semi-classical entropies.
    #[arg(long)]
    pub no_cl: bool,
    /// Include the ħ/2-Wehrl entropies (u = 1 only).
    #[arg(long)]
    pub wehrl: bool,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Point(a) => {
            let cfg = RunConfig::resolve(&a, None)?;
            cmd_point(&cfg, out)?;
            Ok(0)
        }
        Command::Sweep(a) => {
            let cfg = RunConfig::resolve(&a, None)?;
            cmd_sweep(&cfg, out)?;
            Ok(0)
        }
        Command::Fig1(a) => {
            let cfg = RunConfig::resolve(&a, Some(RunConfig::fig1()))?;
            cmd_sweep(&cfg, out)?;
            Ok(0)
        }
        Command::Check { mutate } => {
            let m = match mutate {
                None => crate::entropy::Mutation::None,
                Some(MutationArg::DropMeasure) => crate::entropy::Mutation::DropPhaseSpaceMeasure,
                Some(MutationArg::FlipSign) => crate::entropy::Mutation::FlipShannonSign,
            };
            let outcomes = run_checks(m);
            let mut failed = Vec::new();
            for o in &outcomes {
                writeln!(out, "{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail)?;
                if !o.passed {
                    failed.push(o.name);
                }
            }
            if failed.is_empty() {
                writeln!(out, "all {} checks passed", outcomes.len())?;
                Ok(0)
            } else {
                writeln!(out, "failed checks: {}", failed.join(", "))?;
                Ok(1)
            }
        }
    }
}

fn options(cfg: &RunConfig) -> ReportOptions {
    let d = ReportOptions::default();
    ReportOptions {
        grid: GridSpec { n: cfg.grid_n.unwrap_or(d.grid.n), half_width: cfg.grid_l },
        phase: PhaseSpec { n: cfg.phase_n.unwrap_or(d.phase.n), ..d.phase },
        include_cl: cfg.include_cl,
        include_wehrl: cfg.include_wehrl,
        ..d
    }
}

/// One sweep point: weight built from `v_eff`, or the explicit weight.
fn weight_for(cfg: &RunConfig, params: &CompositeParams, v_eff: Option<f64>) -> Result<WeightFunction> {
    match (&cfg.weight, v_eff) {
        (WeightKind::Constant, Some(v)) => box_for_veff(params, v),
        (WeightKind::Gaussian, Some(v)) => gaussian_for_veff(params, v),
        (WeightKind::Constant, None) => WeightFunction::constant_box(cfg.big_v.ok_or_else(|| {
            Error::InvalidConfig("constant weight needs --veff or --V".into())
        })?),
        (WeightKind::Gaussian, None) => WeightFunction::gaussian(
            cfg.big_b.ok_or_else(|| Error::InvalidConfig("gaussian weight needs --veff or --B".into()))?,
        ),
        (WeightKind::Table(t), _) => Ok(t.clone()),
    }
    .map_err(|e| match e {
        Error::InvalidParams(m) => Error::InvalidConfig(m),
        other => other,
    })
}

fn compute_row(cfg: &RunConfig, u: f64, v_eff: Option<f64>) -> Result<(SweepRow, EntropyReport)> {
    let params = CompositeParams::natural(u);
    params.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let w = weight_for(cfg, &params, v_eff)?;
    let v_eff = match v_eff {
        Some(v) => Some(v),
        None => EffectiveVolumes::of(&params, &w).ok().map(|e| e.v_eff),
    };
    let report = compute_report(&params, &w, &options(cfg))?;
    let large_u = match (&cfg.weight, v_eff) {
        (WeightKind::Gaussian, Some(v)) if cfg.include_large_u => Some(closed_form_gaussian_large_u(v)),
        _ => None,
    };
    Ok((SweepRow::new(u, v_eff, &report, large_u), report))
}

fn cmd_point(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let u = single(&cfg.u, "u")?;
    let v = if cfg.veff.is_empty() { None } else { Some(single(&cfg.veff, "veff")?) };
    let (row, r) = compute_row(cfg, u, v)?;
    output::write_point(out, &row, &r)?;
    if let Some(path) = &cfg.out {
        output::write_csv(path, cfg, std::slice::from_ref(&row))?;
    }
    Ok(())
}

fn single(values: &[f64], name: &str) -> Result<f64> {
    match values {
        [x] => Ok(*x),
        [] => Err(Error::InvalidConfig(format!("point needs --{name}"))),
        _ => Err(Error::InvalidConfig(format!("point takes a single --{name}, got {}", values.len()))),
    }
}

fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    if cfg.u.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one u value".into()));
    }
    let vs: Vec<Option<f64>> = match cfg.weight {
        WeightKind::Table(_) => vec![None],
        _ if cfg.veff.is_empty() => return Err(Error::InvalidConfig("sweep needs --veff values".into())),
        _ => cfg.veff.iter().map(|&v| Some(v)).collect(),
    };
    let points: Vec<(f64, Option<f64>)> = cfg.u.iter().flat_map(|&u| vs.iter().map(move |&v| (u, v))).collect();
    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(u, v)| compute_row(cfg, u, v).map(|r| r.0))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.sort_key().partial_cmp(&b.sort_key()).expect("finite keys"));
    match &cfg.out {
        Some(path) => {
            output::write_csv(path, cfg, &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => output::write_csv_to(out, cfg, &rows)?,
    }
    Ok(())
}
