//! Entropy functionals of the one-body density matrix and of its
//! phase-space representations, plus the effective temperature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{cm_wavefunction, rho_matrix, BoxMode, DensityMatrix, Geometry, GridSpec, Kernel};
use crate::model::{CompositeParams, WeightFunction};
use crate::phase_space::{wigner_field, HusimiHalf, Measure, PhaseSpaceField, PhaseSpec};

const EIGEN_CLAMP: f64 = -1e-6;
const FIELD_CLAMP: f64 = -1e-8;
const VN_TOL: f64 = 1e-4;
const VN_MAX_N: usize = 2048;

/// Rényi-2 entropy `-ln Tr ρ²`.
pub fn renyi2(dm: &DensityMatrix) -> Result<f64> {
    renyi2_from_purity(dm.purity())
}

pub fn renyi2_from_purity(purity: f64) -> Result<f64> {
    if !(purity > 0.0) || !purity.is_finite() {
        return Err(Error::NonPositivePurity(purity));
    }
    Ok(-purity.ln())
}

/// `-Σ λ ln λ` over a spectrum; small negative eigenvalues are discretisation
/// noise and count as zero.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < EIGEN_CLAMP {
            return Err(Error::SpectrumError(l));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

/// von Neumann entropy from the spectrum of `Δq·ρ`.
pub fn von_neumann(dm: &DensityMatrix) -> Result<f64> {
    spectrum_entropy(&dm.eigenvalues()?)
}

/// Converged von Neumann entropy with the spectrum it came from.
#[derive(Debug, Clone)]
pub struct VonNeumann {
    pub entropy: f64,
    /// Grid size of the accepted evaluation.
    pub n: usize,
    pub min_eigenvalue: f64,
    pub eigenvalue_sum: f64,
    pub change: f64,
}

/// Evaluates at `N` and `2N` grid points over the same window, doubling
/// until successive entropies differ by less than `1e-4`.
pub fn von_neumann_converged(kernel: &Kernel, start_n: usize, half_width: Option<f64>) -> Result<VonNeumann> {
    let mut n = start_n.max(64);
    let first = rho_matrix(kernel, &GridSpec { n, half_width })?;
    let window = match first.geometry {
        Geometry::Line => Some(first.grid.hi),
        Geometry::Periodic { .. } => None,
    };
    let mut prev = von_neumann(&first)?;
    let mut change = f64::INFINITY;
    while n < VN_MAX_N {
        n *= 2;
        let dm = rho_matrix(kernel, &GridSpec { n, half_width: window })?;
        let eigs = dm.eigenvalues()?;
        let s = spectrum_entropy(&eigs)?;
        change = (s - prev).abs();
        if change < VN_TOL {
            return Ok(VonNeumann {
                entropy: s,
                n,
                min_eigenvalue: eigs.iter().copied().fold(f64::INFINITY, f64::min),
                eigenvalue_sum: eigs.iter().sum(),
                change,
            });
        }
        prev = s;
    }
    Err(Error::NoConvergence(format!(
        "von Neumann entropy still changing by {change:.2e} at N = {n}"
    )))
}

/// Test-only hooks that break the phase-space functionals in known ways,
/// so that the self-check can demonstrate it catches them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    DropPhaseSpaceMeasure,
    FlipShannonSign,
}

fn check_field(field: &PhaseSpaceField) -> Result<()> {
    let (v, q, p) = field.min_value();
    if v < FIELD_CLAMP {
        return Err(match field.measure {
            Measure::Wigner { .. } => Error::NegativeWigner { value: v, q, p },
            Measure::HusimiHalf { .. } => Error::NegativeHusimi { value: v, q, p },
        });
    }
    Ok(())
}

#[doc(hidden)]
pub fn shannon_with(field: &PhaseSpaceField, m: Mutation) -> Result<f64> {
    check_field(field)?;
    let s = -field.f_ln_f();
    Ok(if m == Mutation::FlipShannonSign { -s } else { s })
}

#[doc(hidden)]
pub fn phase_space_purity_with(field: &PhaseSpaceField, m: Mutation) -> f64 {
    let p = field.second_moment();
    if m == Mutation::DropPhaseSpaceMeasure {
        p * field.measure.cell()
    } else {
        p
    }
}

/// `∫ W² dqdp/2πħ`, equal to `Tr ρ²`.
pub fn phase_space_purity(field: &PhaseSpaceField) -> f64 {
    phase_space_purity_with(field, Mutation::None)
}

/// Wigner-Shannon entropy `-∫ W ln W dqdp/2πħ`; needs `W ≥ 0`.
pub fn wigner_shannon(field: &PhaseSpaceField) -> Result<f64> {
    if !matches!(field.measure, Measure::Wigner { .. }) {
        return Err(Error::InvalidParams("wigner_shannon needs a Wigner field".into()));
    }
    shannon_with(field, Mutation::None)
}

/// Rényi-2 entropy through the phase-space purity.
pub fn renyi2_phase_space(field: &PhaseSpaceField) -> Result<f64> {
    renyi2_from_purity(phase_space_purity(field))
}

fn require_husimi(field: &PhaseSpaceField) -> Result<()> {
    match field.measure {
        Measure::HusimiHalf { .. } => Ok(()),
        _ => Err(Error::InvalidParams("expected a Husimi field on the ħ/2 measure".into())),
    }
}

/// `-∫ H ln H dqdp/2π(ħ/2)`.
pub fn wehrl_half(field: &PhaseSpaceField) -> Result<f64> {
    require_husimi(field)?;
    shannon_with(field, Mutation::None)
}

/// `-ln ∫ H² dqdp/2π(ħ/2)`.
pub fn renyi2_wehrl_half(field: &PhaseSpaceField) -> Result<f64> {
    require_husimi(field)?;
    check_field(field)?;
    renyi2_from_purity(field.second_moment())
}

/// Semi-classical Rényi-2 entropy on the default grid.
pub fn renyi2_cl(params: &CompositeParams, w: &WeightFunction) -> Result<f64> {
    let k = Kernel::semi_classical(params, w, BoxMode::Bulk)?;
    renyi2(&rho_matrix(&k, &GridSpec::default())?)
}

/// Semi-classical Wigner-Shannon entropy on the default phase-space grid.
pub fn wigner_shannon_cl(params: &CompositeParams, w: &WeightFunction) -> Result<f64> {
    let k = Kernel::semi_classical(params, w, BoxMode::Bulk)?;
    wigner_shannon(&wigner_field(&k, &PhaseSpec::default())?)
}

/// `kT = ħ²/(2m bs²)`.
pub fn effective_temperature(params: &CompositeParams) -> Result<f64> {
    let bs = params.bs()?;
    Ok(params.hbar * params.hbar / (2.0 * params.m * bs * bs))
}

/// Largest off-diagonal element `|⟨k|ρ|k'⟩|` between the plane waves
/// `k = 2πn/V`, `|n| ≤ modes`, of a ring-geometry density matrix, together
/// with the largest diagonal element for scale.
pub fn momentum_coherence(dm: &DensityMatrix, modes: usize) -> Result<(f64, f64)> {
    let Geometry::Periodic { period } = dm.geometry else {
        return Err(Error::InvalidParams("momentum basis needs the periodic (bulk) geometry".into()));
    };
    let pts = dm.grid.points();
    let n = pts.len();
    let dq = dm.dq();
    let waves: Vec<Vec<Complex64>> = (-(modes as i64)..=modes as i64)
        .map(|m| {
            let k = 2.0 * PI * m as f64 / period;
            pts.iter().map(|&q| Complex64::from_polar(1.0 / period.sqrt(), k * q)).collect()
        })
        .collect();
    let rho = |i: usize, j: usize| {
        Complex64::new(dm.re[(i, j)], dm.im.as_ref().map_or(0.0, |m| m[(i, j)]))
    };
    let applied: Vec<Vec<Complex64>> = waves
        .iter()
        .map(|v| (0..n).map(|i| (0..n).map(|j| rho(i, j) * v[j]).sum::<Complex64>() * dq).collect())
        .collect();
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    for (a, wa) in waves.iter().enumerate() {
        for (c, rv) in applied.iter().enumerate() {
            let e: Complex64 = wa.iter().zip(rv).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dq;
            if a == c {
                diag = diag.max(e.norm());
            } else {
                off = off.max(e.norm());
            }
        }
    }
    Ok((off, diag))
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub grid: GridSpec,
    pub vn_start_n: usize,
    pub phase: PhaseSpec,
    pub box_mode: BoxMode,
    pub include_cl: bool,
    pub include_wehrl: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            vn_start_n: 256,
            phase: PhaseSpec::default(),
            box_mode: BoxMode::Bulk,
            include_cl: true,
            include_wehrl: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub grid_n: usize,
    pub grid_half_width: f64,
    pub vn_n: usize,
    pub vn_change: f64,
    pub phase_n: usize,
    pub raw_trace: f64,
    pub grid_trace: f64,
    pub min_eigenvalue: f64,
    pub eigenvalue_sum: f64,
    pub wigner_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub s_r2: f64,
    pub s_vn: f64,
    pub s_wsh: f64,
    pub s_r2_cl: Option<f64>,
    pub s_wsh_cl: Option<f64>,
    pub s_wehrl_half: Option<f64>,
    pub s_r2_wehrl_half: Option<f64>,
    pub kt: Option<f64>,
    pub purity: f64,
    pub phase_space_purity: f64,
    pub diagnostics: Diagnostics,
}

impl EntropyReport {
    pub fn exp_r2(&self) -> f64 {
        self.s_r2.exp()
    }
    pub fn exp_vn(&self) -> f64 {
        self.s_vn.exp()
    }
    pub fn exp_wsh(&self) -> f64 {
        self.s_wsh.exp()
    }
    pub fn exp_r2_cl(&self) -> Option<f64> {
        self.s_r2_cl.map(f64::exp)
    }
}

/// Evaluates every entropy of the composite.
pub fn compute_report(params: &CompositeParams, w: &WeightFunction, opts: &ReportOptions) -> Result<EntropyReport> {
    params.validate()?;
    let kernel = Kernel::exact(params, w, opts.box_mode)?;
    let dm = rho_matrix(&kernel, &opts.grid)?;
    let purity = dm.purity();
    let s_r2 = renyi2(&dm)?;
    let window = match dm.geometry {
        Geometry::Line => Some(dm.grid.hi),
        Geometry::Periodic { .. } => None,
    };
    let vn = von_neumann_converged(&kernel, opts.vn_start_n, window)?;

    let phase = PhaseSpec { q_half: opts.phase.q_half.or(window), ..opts.phase };
    let field = wigner_field(&kernel, &phase)?;
    let s_wsh = wigner_shannon(&field)?;
    let phase_space_purity = phase_space_purity(&field);

    let (mut s_r2_cl, mut s_wsh_cl) = (None, None);
    if opts.include_cl && params.u > 0.0 {
        let kcl = Kernel::semi_classical(params, w, opts.box_mode)?;
        let dm_cl = rho_matrix(&kcl, &GridSpec { half_width: opts.grid.half_width.or(window), ..opts.grid })?;
        s_r2_cl = Some(renyi2(&dm_cl)?);
        s_wsh_cl = Some(wigner_shannon(&wigner_field(&kcl, &phase)?)?);
    }

    let (mut s_wehrl_half, mut s_r2_wehrl_half) = (None, None);
    if opts.include_wehrl && params.u == 1.0 && dm.geometry == Geometry::Line {
        let cm = cm_wavefunction(params, w)?;
        let h = HusimiHalf::for_cm(&cm, params.hbar, phase.n)?;
        let (qg, pg) = phase.grids_for(&kernel)?;
        let hf = h.field(qg, pg);
        s_wehrl_half = Some(wehrl_half(&hf)?);
        s_r2_wehrl_half = Some(renyi2_wehrl_half(&hf)?);
    }

    Ok(EntropyReport {
        s_r2,
        s_vn: vn.entropy,
        s_wsh,
        s_r2_cl,
        s_wsh_cl,
        s_wehrl_half,
        s_r2_wehrl_half,
        kt: if params.u > 0.0 { Some(effective_temperature(params)?) } else { None },
        purity,
        phase_space_purity,
        diagnostics: Diagnostics {
            grid_n: dm.n(),
            grid_half_width: 0.5 * (dm.grid.hi - dm.grid.lo),
            vn_n: vn.n,
            vn_change: vn.change,
            phase_n: phase.n,
            raw_trace: kernel.raw_trace(),
            grid_trace: dm.grid_trace,
            min_eigenvalue: vn.min_eigenvalue,
            eigenvalue_sum: vn.eigenvalue_sum,
            wigner_integral: field.integral(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{box_for_veff, gaussian_for_veff};
    use crate::numerics::Grid1D;

    fn p(u: f64) -> CompositeParams {
        CompositeParams::natural(u)
    }

    fn gauss_kernel(u: f64, v: f64) -> Kernel {
        let params = p(u);
        Kernel::exact(&params, &gaussian_for_veff(&params, v).unwrap(), BoxMode::Bulk).unwrap()
    }

    fn closed_r2(u: f64, v: f64) -> f64 {
        let g = (1.0 + (u + 1.0) * v * v) / (1.0 + u * v * v);
        0.5 * (1.0 + v * v).ln() - 0.5 * g.ln()
    }

    #[test]
    fn renyi2_gaussian_values() {
        let dm = rho_matrix(&gauss_kernel(1.0, 2.0), &GridSpec::default()).unwrap();
        assert!((renyi2(&dm).unwrap() - 0.51083).abs() < 1e-4);
        for u in [0.0, 1.0, 8.0] {
            let dm = rho_matrix(&gauss_kernel(u, 0.0), &GridSpec::default()).unwrap();
            assert!(renyi2(&dm).unwrap().abs() < 1e-6);
        }
        let dm = rho_matrix(&gauss_kernel(0.0, 3.0), &GridSpec::default()).unwrap();
        assert!(renyi2(&dm).unwrap().abs() < 1e-6);
    }

    #[test]
    fn renyi2_rejects_nonpositive_purity() {
        assert!(matches!(renyi2_from_purity(0.0), Err(Error::NonPositivePurity(_))));
        assert!(matches!(renyi2_from_purity(f64::NAN), Err(Error::NonPositivePurity(_))));
    }

    #[test]
    fn spectrum_entropy_clamps_and_rejects() {
        assert!(spectrum_entropy(&[1.0, -5e-7]).unwrap().abs() < 1e-15);
        assert!(matches!(spectrum_entropy(&[1.0, -2e-6]), Err(Error::SpectrumError(_))));
        assert!((spectrum_entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn geometric_spectrum_oracle() {
        let z: f64 = 0.25;
        let oracle = -(1.0 - z).ln() - z * z.ln() / (1.0 - z);
        let dm = rho_matrix(&gauss_kernel(1.0, 2.0), &GridSpec { n: 512, half_width: None }).unwrap();
        let eigs = dm.eigenvalues().unwrap();
        for (k, l) in eigs.iter().take(6).enumerate() {
            assert!((l - (1.0 - z) * z.powi(k as i32)).abs() < 1e-8, "λ_{k} = {l}");
        }
        assert!((spectrum_entropy(&eigs).unwrap() - oracle).abs() < 1e-6);
        assert!((oracle - 0.74978).abs() < 1e-5);
    }

    #[test]
    fn von_neumann_protocol_converges() {
        let vn = von_neumann_converged(&gauss_kernel(1.0, 2.0), 256, None).unwrap();
        assert!((vn.entropy - 0.74978).abs() < 1e-4);
        assert!((vn.eigenvalue_sum - 1.0).abs() < 1e-6);
        assert!(vn.min_eigenvalue > -1e-8);
        let pure = von_neumann_converged(&gauss_kernel(1.0, 0.0), 256, None).unwrap();
        assert!(pure.entropy.abs() < 1e-6);
    }

    #[test]
    fn wigner_shannon_gaussian_shift() {
        for (u, v) in [(1.0, 2.0), (8.0, 1.0), (1.0, 0.0)] {
            let f = wigner_field(&gauss_kernel(u, v), &PhaseSpec::default()).unwrap();
            let s = wigner_shannon(&f).unwrap();
            assert!((s - closed_r2(u, v) - (1.0 - 2f64.ln())).abs() < 1e-4, "u={u} v={v} {s}");
        }
    }

    #[test]
    fn wigner_shannon_of_uniform_cell() {
        // W = 1/Ω on a cell of volume Ω·2πħ
        let omega = 7.0;
        let q = Grid1D::periodic(0.0, 2.0 * PI, 64).unwrap();
        let p = Grid1D::periodic(0.0, omega, 64).unwrap();
        let field = PhaseSpaceField {
            q,
            p,
            values: vec![1.0 / omega; 64 * 64],
            measure: Measure::Wigner { hbar: 1.0 },
        };
        assert!((field.integral() - 1.0).abs() < 1e-12);
        assert!((wigner_shannon(&field).unwrap() - omega.ln()).abs() < 1e-12);
    }

    #[test]
    fn negative_field_is_rejected() {
        let q = Grid1D::symmetric(1.0, 8).unwrap();
        let mut values = vec![0.1; 64];
        values[10] = -1e-3;
        let field = PhaseSpaceField { q, p: q, values, measure: Measure::Wigner { hbar: 1.0 } };
        assert!(matches!(wigner_shannon(&field), Err(Error::NegativeWigner { .. })));
        let h = PhaseSpaceField { measure: Measure::HusimiHalf { hbar: 1.0 }, ..field };
        assert!(matches!(wehrl_half(&h), Err(Error::NegativeHusimi { .. })));
    }

    #[test]
    fn constant_box_triple_identity() {
        let params = p(1.0);
        let w = box_for_veff(&params, 100.0).unwrap();
        let r = compute_report(&params, &w, &ReportOptions::default()).unwrap();
        let s_r2 = 100f64.ln() - 0.5 * (2.0 * PI).ln();
        assert!((r.s_r2 - s_r2).abs() < 1e-3);
        assert!((r.s_vn - (s_r2 + 0.5 * (1.0 - 2f64.ln()))).abs() < 1e-3);
        assert!((r.s_wsh - r.s_vn).abs() < 1e-3);
        assert_eq!(r.s_r2_cl, Some(r.s_r2));
    }

    #[test]
    fn box_is_diagonal_in_momentum() {
        let params = p(1.0);
        let k = Kernel::exact(&params, &box_for_veff(&params, 20.0).unwrap(), BoxMode::Bulk).unwrap();
        let dm = rho_matrix(&k, &GridSpec { n: 256, half_width: None }).unwrap();
        let (off, diag) = momentum_coherence(&dm, 6).unwrap();
        assert!(off < 1e-6, "{off}");
        assert!((diag - 2.0 * 2f64.sqrt() * PI.sqrt() / (20.0 * 2f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn semi_classical_gaussian() {
        let params = p(1.0);
        let w = gaussian_for_veff(&params, 2.0).unwrap();
        assert!((renyi2_cl(&params, &w).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-4);
        assert!((wigner_shannon_cl(&params, &w).unwrap() - 0.5 * 3f64.ln() - 1.0 + 2f64.ln()).abs() < 1e-4);
        assert!(renyi2_cl(&p(0.0), &w).is_err());
    }

    #[test]
    fn wehrl_relations_at_equal_masses() {
        let params = p(1.0);
        for v in [0.0, 2.0] {
            let r = compute_report(&params, &gaussian_for_veff(&params, v).unwrap(), &ReportOptions::default()).unwrap();
            let ln2 = 2f64.ln();
            assert!((r.s_wehrl_half.unwrap() - r.s_wsh - ln2).abs() < 1e-4);
            assert!((r.s_r2_wehrl_half.unwrap() - r.s_r2 - ln2).abs() < 1e-4);
        }
        let r = compute_report(&p(8.0), &gaussian_for_veff(&p(8.0), 1.0).unwrap(), &ReportOptions::default()).unwrap();
        assert!(r.s_wehrl_half.is_none());
    }

    #[test]
    fn effective_temperature_values() {
        assert!((effective_temperature(&p(1.0)).unwrap() - 0.25).abs() < 1e-15);
        assert!((effective_temperature(&p(1e9)).unwrap() - 0.5).abs() < 1e-8);
        let wide = CompositeParams { b: 2.0, ..p(3.0) };
        assert!((effective_temperature(&wide).unwrap() - effective_temperature(&p(3.0)).unwrap() / 4.0).abs() < 1e-15);
        assert!(effective_temperature(&p(0.0)).is_err());
    }

    #[test]
    fn mutations_change_the_answers() {
        let f = wigner_field(&gauss_kernel(1.0, 2.0), &PhaseSpec::default()).unwrap();
        let good = phase_space_purity(&f);
        assert!((phase_space_purity_with(&f, Mutation::DropPhaseSpaceMeasure) - good).abs() > 1.0);
        let s = wigner_shannon(&f).unwrap();
        assert!((shannon_with(&f, Mutation::FlipShannonSign).unwrap() + s).abs() < 1e-15);
    }
}
