use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analytic::{closed_form_constant, closed_form_gaussian};
use crate::entropy::{
    momentum_coherence, phase_space_purity_with, renyi2, renyi2_cl, renyi2_from_purity, shannon_with,
    von_neumann_converged, Mutation,
};
use crate::error::Result;
use crate::kernels::{cm_wavefunction, rho_matrix, BoxMode, GridSpec, Kernel};
use crate::model::{box_for_veff, gaussian_for_veff, CompositeParams};
use crate::numerics::Grid1D;
use crate::phase_space::{cm_wigner_field, coarse_grain_field, wigner_field, HusimiHalf, PhaseSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(Mutation) -> Result<(bool, String)>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("renyi2-closed-form", renyi2_closed_form),
    ("wigner-shannon-shift", wigner_shannon_shift),
    ("constant-box-identity", constant_box_identity),
    ("purity-bridge", purity_bridge),
    ("coarse-graining", coarse_graining),
    ("husimi-half", husimi_relations),
    ("spectrum", spectrum),
    ("semi-classical", semi_classical),
    ("momentum-diagonal", momentum_diagonal),
];

/// Runs the oracle suite; `mutation` deliberately breaks a functional.
pub fn run_checks(mutation: Mutation) -> Vec<CheckOutcome> {
    CHECKS
        .par_iter()
        .map(|(name, f)| match f(mutation) {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

fn gauss(u: f64, v: f64) -> Result<(CompositeParams, Kernel)> {
    let params = CompositeParams::natural(u);
    let k = Kernel::exact(&params, &gaussian_for_veff(&params, v)?, BoxMode::Bulk)?;
    Ok((params, k))
}

fn verdict(worst: f64, tol: f64, what: &str) -> (bool, String) {
    (worst < tol, format!("max {what} {worst:.2e} (tolerance {tol:.0e})"))
}

fn renyi2_closed_form(_: Mutation) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for u in [1.0, 8.0] {
        for v in [0.0, 1.0, 2.0] {
            let (params, k) = gauss(u, v)?;
            let s = renyi2(&rho_matrix(&k, &GridSpec::default())?)?;
            worst = worst.max((s - closed_form_gaussian(&params, v)?.s_r2).abs());
        }
    }
    Ok(verdict(worst, 1e-4, "|S_R2 - closed form|"))
}

fn wigner_shannon_shift(m: Mutation) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (u, v) in [(1.0, 0.0), (1.0, 2.0), (8.0, 2.0)] {
        let (params, k) = gauss(u, v)?;
        let s = shannon_with(&wigner_field(&k, &PhaseSpec::default())?, m)?;
        worst = worst.max((s - closed_form_gaussian(&params, v)?.s_r2 - (1.0 - 2f64.ln())).abs());
    }
    Ok(verdict(worst, 1e-4, "|S_WSh - S_R2 - (1 - ln 2)|"))
}

fn constant_box_identity(m: Mutation) -> Result<(bool, String)> {
    let params = CompositeParams::natural(1.0);
    let w = box_for_veff(&params, 100.0)?;
    let oracle = closed_form_constant(&params, 100.0 * params.bs()?)?;
    let k = Kernel::exact(&params, &w, BoxMode::Bulk)?;
    let s_r2 = renyi2(&rho_matrix(&k, &GridSpec::default())?)?;
    let s_vn = von_neumann_converged(&k, 256, None)?.entropy;
    let s_wsh = shannon_with(&wigner_field(&k, &PhaseSpec::default())?, m)?;
    let target = oracle.s_vn.expect("box has S_vN");
    let worst = (s_r2 - oracle.s_r2).abs().max((s_vn - target).abs()).max((s_wsh - target).abs());
    Ok(verdict(worst, 1e-3, "deviation from the V_eff = 100 identities"))
}

fn purity_bridge(m: Mutation) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for u in [1.0, 8.0] {
        for v in [0.0, 2.0] {
            let (_, k) = gauss(u, v)?;
            let tr = rho_matrix(&k, &GridSpec::default())?.purity();
            let ps = phase_space_purity_with(&wigner_field(&k, &PhaseSpec::default())?, m);
            worst = worst.max(((tr - ps) / tr).abs());
        }
    }
    Ok(verdict(worst, 1e-4, "relative |Tr rho^2 - int W^2|"))
}

fn probe_grids() -> Result<(Grid1D, Grid1D)> {
    Ok((Grid1D::symmetric(5.0, 11)?, Grid1D::symmetric(2.5, 11)?))
}

fn coarse_graining(_: Mutation) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for u in [1.0, 4.0] {
        let (params, k) = gauss(u, 2.0)?;
        let cm = cm_wavefunction(&params, &gaussian_for_veff(&params, 2.0)?)?;
        let wcm = cm_wigner_field(&cm, params.hbar, 256)?;
        let (qg, pg) = probe_grids()?;
        let cg = coarse_grain_field(&wcm, &params, qg, pg)?;
        for (i, q) in qg.points().into_iter().enumerate() {
            for (j, p) in pg.points().into_iter().enumerate() {
                worst = worst.max((cg.at(i, j) - k.wigner(q, p)).abs());
            }
        }
    }
    Ok(verdict(worst, 1e-6, "|coarse_grain - W|"))
}

fn husimi_relations(m: Mutation) -> Result<(bool, String)> {
    let (params, k) = gauss(1.0, 2.0)?;
    let cm = cm_wavefunction(&params, &gaussian_for_veff(&params, 2.0)?)?;
    let h = HusimiHalf::for_cm(&cm, params.hbar, 256)?;
    let (qg, pg) = probe_grids()?;
    let probe = h.field(qg, pg);
    let mut pointwise = 0.0f64;
    for (i, q) in qg.points().into_iter().enumerate() {
        for (j, p) in pg.points().into_iter().enumerate() {
            pointwise = pointwise.max((2.0 * probe.at(i, j) - k.wigner(q, p)).abs());
        }
    }
    let (qf, pf) = PhaseSpec::default().grids_for(&k)?;
    let hf = h.field(qf, pf);
    let wf = wigner_field(&k, &PhaseSpec::default())?;
    let ln2 = 2f64.ln();
    let wehrl = (shannon_with(&hf, m)? - shannon_with(&wf, m)? - ln2).abs();
    let r2 = (renyi2_from_purity(hf.second_moment())? - renyi2_from_purity(wf.second_moment())? - ln2).abs();
    let ok = pointwise < 1e-6 && wehrl < 1e-4 && r2 < 1e-4;
    Ok((ok, format!("|2H - W| {pointwise:.2e}, Wehrl shift error {wehrl:.2e}, R2-Wehrl shift error {r2:.2e}")))
}

fn spectrum(_: Mutation) -> Result<(bool, String)> {
    let (_, k) = gauss(1.0, 2.0)?;
    let vn = von_neumann_converged(&k, 256, None)?;
    let s_r2 = renyi2(&rho_matrix(&k, &GridSpec::default())?)?;
    let z: f64 = 0.25;
    let oracle = -(1.0 - z).ln() - z * z.ln() / (1.0 - z);
    let ok = (vn.entropy - oracle).abs() < 1e-3
        && vn.min_eigenvalue >= -1e-8
        && (vn.eigenvalue_sum - 1.0).abs() < 1e-6
        && s_r2 <= vn.entropy + 1e-6;
    Ok((
        ok,
        format!(
            "S_vN {:.5} (oracle {oracle:.5}), min eigenvalue {:.1e}, sum {:.8}",
            vn.entropy, vn.min_eigenvalue, vn.eigenvalue_sum
        ),
    ))
}

fn semi_classical(_: Mutation) -> Result<(bool, String)> {
    let params = CompositeParams::natural(1.0);
    let s_cl = renyi2_cl(&params, &gaussian_for_veff(&params, 2.0)?)?;
    let gauss_err = (s_cl - 0.5 * 3f64.ln()).abs();
    let w = box_for_veff(&params, 50.0)?;
    let box_err = (renyi2_cl(&params, &w)?
        - renyi2(&rho_matrix(&Kernel::exact(&params, &w, BoxMode::Bulk)?, &GridSpec::default())?)?)
    .abs();
    Ok((
        gauss_err < 1e-4 && box_err < 1e-10,
        format!("Gaussian error {gauss_err:.2e}, box |S_R2_cl - S_R2| {box_err:.2e}"),
    ))
}

fn momentum_diagonal(_: Mutation) -> Result<(bool, String)> {
    let params = CompositeParams::natural(1.0);
    let k = Kernel::exact(&params, &box_for_veff(&params, 20.0)?, BoxMode::Bulk)?;
    let dm = rho_matrix(&k, &GridSpec { n: 256, half_width: None })?;
    let (off, diag) = momentum_coherence(&dm, 6)?;
    let expected = 2.0 * PI.sqrt() / 20.0;
    Ok((
        off < 1e-6 && (diag - expected).abs() < 1e-6,
        format!("largest off-diagonal {off:.1e}, largest occupation {diag:.6}"),
    ))
}
