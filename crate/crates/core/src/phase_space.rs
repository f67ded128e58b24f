//! Phase-space representations: Wigner functions of the one-body kernel
//! (exact and semi-classical) and of pure states, the two-body Wigner
//! function in cm/relative variables, the Gaussian coarse-graining map, and
//! the Husimi function on the phase space with Planck constant `ħ/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{cm_wavefunction, BoxMode, CmWaveFunction, Geometry, Kernel};
use crate::model::{CompositeParams, WeightFunction};
use crate::numerics::{integrate_1d_complex, Grid1D, QuadratureSpec};

const IMAG_RESIDUE: f64 = 1e-10;

/// Integration measure attached to a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// `dq dp / 2πħ`.
    Wigner { hbar: f64 },
    /// `dq dp / 2π(ħ/2)`.
    HusimiHalf { hbar: f64 },
}

impl Measure {
    /// Phase-space cell that the measure divides by.
    pub fn cell(&self) -> f64 {
        match *self {
            Measure::Wigner { hbar } => 2.0 * PI * hbar,
            Measure::HusimiHalf { hbar } => PI * hbar,
        }
    }
}

/// Real function sampled on a `(q, p)` grid, stored q-major.
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    pub q: Grid1D,
    pub p: Grid1D,
    pub values: Vec<f64>,
    pub measure: Measure,
}

impl PhaseSpaceField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p.n + j]
    }

    fn cell_weight(&self) -> f64 {
        self.q.spacing() * self.p.spacing() / self.measure.cell()
    }

    /// `∫ f dμ`. Grids are either periodic in q or wide enough that edge
    /// samples vanish, so the plain sum is the trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_weight()
    }

    /// `∫ f² dμ`.
    pub fn second_moment(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_weight()
    }

    /// `∫ f ln f dμ` with `0 ln 0 = 0`; values must already be nonnegative.
    pub(crate) fn f_ln_f(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
            .sum::<f64>()
            * self.cell_weight()
    }

    /// Smallest value and where it sits.
    pub fn min_value(&self) -> (f64, f64, f64) {
        let (k, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty field");
        (v, self.q.point(k / self.p.n), self.p.point(k % self.p.n))
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Phase-space grid request; `None` extents are chosen from the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub n: usize,
    pub q_half: Option<f64>,
    pub p_half: Option<f64>,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        Self { n: 256, q_half: None, p_half: None }
    }
}

impl PhaseSpec {
    /// Grids for a kernel: periodic in q on a ring, `±6ħ/b` in p.
    pub fn grids_for(&self, kernel: &Kernel) -> Result<(Grid1D, Grid1D)> {
        let params = kernel.params();
        let q = match kernel.geometry() {
            Geometry::Periodic { period } => Grid1D::periodic(-0.5 * period, period, self.n)?,
            Geometry::Line => {
                Grid1D::symmetric(self.q_half.unwrap_or_else(|| kernel.suggested_half_width()), self.n)?
            }
        };
        let p = Grid1D::symmetric(self.p_half.unwrap_or(6.0 * params.hbar / params.b), self.n)?;
        Ok((q, p))
    }
}

/// Real part of a Wigner value whose imaginary part is quadrature residue.
fn checked_real(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_RESIDUE * z.re.abs().max(1.0) {
        return Err(Error::QuadratureNotConverged { refinements: 0, change: z.im.abs(), tol: IMAG_RESIDUE });
    }
    Ok(z.re)
}

/// Samples the kernel's Wigner function on a grid.
pub fn wigner_field(kernel: &Kernel, spec: &PhaseSpec) -> Result<PhaseSpaceField> {
    use rayon::prelude::*;
    let (qg, pg) = spec.grids_for(kernel)?;
    if kernel.is_node_sum() {
        return discrete_wigner_field(kernel, qg, pg);
    }
    let (qs, ps) = (qg.points(), pg.points());
    let rows: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|&q| ps.iter().map(|&p| checked_real(kernel.wigner_complex(q, p))).collect())
        .collect::<Result<_>>()?;
    Ok(PhaseSpaceField {
        q: qg,
        p: pg,
        values: rows.concat(),
        measure: Measure::Wigner { hbar: kernel.params().hbar },
    })
}

/// Node-sum kernels are too costly to transform pointwise. Instead `ρ` is
/// sampled on a grid of half the q spacing and `η = 2kΔ` summed directly.
fn discrete_wigner_field(kernel: &Kernel, qg: Grid1D, pg: Grid1D) -> Result<PhaseSpaceField> {
    use rayon::prelude::*;
    let hbar = kernel.params().hbar;
    let fine = Grid1D::new(qg.lo, qg.hi, 2 * qg.n - 1)?;
    let delta = fine.spacing();
    let p_limit = PI * hbar / (2.0 * delta);
    if pg.lo.abs().max(pg.hi.abs()) >= p_limit {
        return Err(Error::InvalidParams(format!(
            "momentum window {} exceeds the alias limit {p_limit:.4} of the q grid",
            pg.hi
        )));
    }
    let (re, im) = kernel.sample_matrix(&fine.points());
    let nf = fine.n;
    let ps = pg.points();
    let rows: Vec<Vec<f64>> = (0..qg.n)
        .into_par_iter()
        .map(|i| {
            let c = 2 * i;
            let k_max = c.min(nf - 1 - c);
            ps.iter()
                .map(|&p| {
                    let step = -2.0 * p * delta / hbar;
                    let mut s = re[(c, c)];
                    for k in 1..=k_max {
                        let (a, b) = (c + k, c - k);
                        // terms ±k are complex conjugates of each other
                        let z = Complex64::new(re[(a, b)], im.as_ref().map_or(0.0, |m| m[(a, b)]));
                        s += 2.0 * (z * Complex64::from_polar(1.0, step * k as f64)).re;
                    }
                    2.0 * delta * s
                })
                .collect()
        })
        .collect();
    Ok(PhaseSpaceField { q: qg, p: pg, values: rows.concat(), measure: Measure::Wigner { hbar } })
}

/// Wigner function of the exact one-body kernel (box weights in bulk mode).
pub fn wigner_one_body(params: &CompositeParams, w: &WeightFunction, q: f64, p: f64) -> Result<f64> {
    let k = Kernel::exact(params, w, BoxMode::Bulk)?;
    checked_real(k.wigner_complex(q, p))
}

/// Semi-classical Wigner function `2∫dR |f|² e^{-(R-q)²/bs² - bs²p²/ħ²}`.
pub fn wigner_cl(params: &CompositeParams, w: &WeightFunction, q: f64, p: f64) -> Result<f64> {
    let k = Kernel::semi_classical(params, w, BoxMode::Bulk)?;
    checked_real(k.wigner_complex(q, p))
}

// ---------------------------------------------------------------------------
// pure states

pub trait PureState {
    fn amplitude(&self, x: f64) -> Complex64;
    /// Interval outside which the amplitude is negligible.
    fn extent(&self) -> (f64, f64);
    /// Shortest length scale of the amplitude (momentum bandwidth ~ ħ / length).
    fn length_scale(&self) -> f64;
}

impl PureState for CmWaveFunction {
    fn amplitude(&self, x: f64) -> Complex64 {
        CmWaveFunction::amplitude(self, x)
    }
    fn extent(&self) -> (f64, f64) {
        CmWaveFunction::extent(self)
    }
    fn length_scale(&self) -> f64 {
        self.momentum_length()
    }
}

/// Normalised `(w²π)^{-1/4} e^{-(x-c)²/2w²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
}

impl PureState for GaussianPacket {
    fn amplitude(&self, x: f64) -> Complex64 {
        let w2 = self.width * self.width;
        Complex64::new((w2 * PI).powf(-0.25) * (-(x - self.center).powi(2) / (2.0 * w2)).exp(), 0.0)
    }
    fn extent(&self) -> (f64, f64) {
        (self.center - 9.0 * self.width, self.center + 9.0 * self.width)
    }
    fn length_scale(&self) -> f64 {
        self.width
    }
}

/// Intrinsic relative-motion state, a Gaussian of width `bs`.
pub fn intrinsic_state(params: &CompositeParams) -> Result<GaussianPacket> {
    Ok(GaussianPacket { center: 0.0, width: params.bs()? })
}

/// `∫dη ψ(Q+η/2) ψ*(Q-η/2) e^{-iPη/ħ}` by adaptive trapezoid.
pub fn wigner_pure<S: PureState + ?Sized>(state: &S, q: f64, p: f64, hbar: f64) -> Result<f64> {
    let (lo, hi) = state.extent();
    let eta_max = 2.0 * (hi - q).min(q - lo);
    if eta_max <= 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec { rel_tol: 1e-11, abs_tol: 1e-13, initial_points: 64, ..Default::default() };
    let r = integrate_1d_complex(
        |eta| {
            state.amplitude(q + 0.5 * eta)
                * state.amplitude(q - 0.5 * eta).conj()
                * Complex64::from_polar(1.0, -p * eta / hbar)
        },
        -eta_max,
        eta_max,
        &spec,
    )?;
    checked_real(r.value)
}

/// Default grids for a pure state's Wigner function at Planck constant `hbar`.
pub fn pure_state_grids<S: PureState + ?Sized>(state: &S, n: usize, hbar: f64) -> Result<(Grid1D, Grid1D)> {
    let (lo, hi) = state.extent();
    let ell = state.length_scale();
    let p_half = 7.0 * hbar / ell;
    // η steps of 2Δ alias momenta beyond πħ/2Δ
    let max_dq = PI * hbar / (2.5 * p_half);
    let n = n.max(((hi - lo) / max_dq).ceil() as usize + 1);
    Ok((Grid1D::new(lo, hi, n)?, Grid1D::symmetric(p_half, n.clamp(64, 1024))?))
}

/// Wigner function of a pure state on a grid, using `η = 2kΔq` so that
/// `Q ± η/2` land on grid nodes.
pub fn wigner_pure_field<S: PureState + ?Sized>(
    state: &S,
    q: Grid1D,
    p: Grid1D,
    hbar: f64,
) -> Result<PhaseSpaceField> {
    use rayon::prelude::*;
    let dq = q.spacing();
    let p_limit = PI * hbar / (2.0 * dq);
    if p.lo.abs().max(p.hi.abs()) >= p_limit {
        return Err(Error::InvalidParams(format!(
            "momentum window {} exceeds the alias limit {p_limit:.4} of spacing {dq:.4}",
            p.hi
        )));
    }
    let (lo, hi) = state.extent();
    let k_max = ((hi - lo) / dq).ceil() as isize;
    let offset = k_max;
    let samples: Vec<Complex64> = (-k_max..q.n as isize + k_max)
        .map(|m| state.amplitude(q.lo + m as f64 * dq))
        .collect();
    let ps = p.points();
    let rows: Vec<Vec<f64>> = (0..q.n)
        .into_par_iter()
        .map(|i| {
            let center = i as isize + offset;
            let products: Vec<(isize, Complex64)> = (-k_max..=k_max)
                .filter_map(|k| {
                    let (a, b) = ((center + k) as usize, (center - k) as usize);
                    if a >= samples.len() {
                        return None;
                    }
                    let z = samples[a] * samples[b].conj();
                    (z.norm() > 1e-300).then_some((k, z))
                })
                .collect();
            ps.iter()
                .map(|&pj| {
                    let step = -2.0 * pj * dq / hbar;
                    let s: Complex64 = products
                        .iter()
                        .map(|&(k, z)| z * Complex64::from_polar(1.0, step * k as f64))
                        .sum();
                    2.0 * dq * s.re
                })
                .collect()
        })
        .collect();
    Ok(PhaseSpaceField { q, p, values: rows.concat(), measure: Measure::Wigner { hbar } })
}

// ---------------------------------------------------------------------------
// two-body Wigner function and coarse graining

/// `W₂(q1,p1,q2,p2) = W[Φ_G](Q,P) · W[φ_int](q,p)` with
/// `Q = u1 q1 + u2 q2`, `P = p1 + p2`, `q = q1 - q2`, `p = u2 p1 - u1 p2`.
#[derive(Debug, Clone)]
pub struct TwoBodyWigner {
    pub cm: CmWaveFunction,
    pub intrinsic: GaussianPacket,
    u1: f64,
    u2: f64,
    hbar: f64,
}

impl TwoBodyWigner {
    pub fn new(params: &CompositeParams, w: &WeightFunction) -> Result<Self> {
        let d = params.derive()?;
        Ok(Self {
            cm: cm_wavefunction(params, w)?,
            intrinsic: intrinsic_state(params)?,
            u1: d.u1,
            u2: d.u2,
            hbar: params.hbar,
        })
    }

    /// Maps particle coordinates to `(Q, P, q, p)`.
    pub fn cm_relative(&self, q1: f64, p1: f64, q2: f64, p2: f64) -> (f64, f64, f64, f64) {
        (self.u1 * q1 + self.u2 * q2, p1 + p2, q1 - q2, self.u2 * p1 - self.u1 * p2)
    }

    pub fn eval(&self, q1: f64, p1: f64, q2: f64, p2: f64) -> Result<f64> {
        let (cq, cp, rq, rp) = self.cm_relative(q1, p1, q2, p2);
        Ok(wigner_pure(&self.cm, cq, cp, self.hbar)? * wigner_pure(&self.intrinsic, rq, rp, self.hbar)?)
    }
}

pub fn wigner_two_body(
    params: &CompositeParams,
    w: &WeightFunction,
    q1: f64,
    p1: f64,
    q2: f64,
    p2: f64,
) -> Result<f64> {
    TwoBodyWigner::new(params, w)?.eval(q1, p1, q2, p2)
}

/// Separable Gaussian smearing weights along one axis.
fn smearing(targets: &[f64], sources: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
    targets.iter().map(|&t| sources.iter().map(|&s| f(t, s)).collect()).collect()
}

fn smear(field: &PhaseSpaceField, kq: &[Vec<f64>], kp: &[Vec<f64>], scale: f64) -> Vec<f64> {
    use rayon::prelude::*;
    let np = field.p.n;
    // inner[a][j] = Σ_i kq[a][i] W[i][j]
    let inner: Vec<Vec<f64>> = kq
        .par_iter()
        .map(|row| {
            let mut acc = vec![0.0; np];
            for (i, &k) in row.iter().enumerate() {
                if k < 1e-300 {
                    continue;
                }
                let w = &field.values[i * np..(i + 1) * np];
                for (a, &x) in acc.iter_mut().zip(w) {
                    *a += k * x;
                }
            }
            acc
        })
        .collect();
    inner
        .iter()
        .flat_map(|acc| kp.iter().map(move |row| row.iter().zip(acc).map(|(k, x)| k * x).sum::<f64>() * scale))
        .collect()
}

/// Row kernels along q and p plus the cell scale of a separable smearing.
type Smearing = (Vec<Vec<f64>>, Vec<Vec<f64>>, f64);

fn coarse_kernels(
    params: &CompositeParams,
    field: &PhaseSpaceField,
    q_targets: &[f64],
    p_targets: &[f64],
) -> Result<Smearing> {
    let d = params.derive()?;
    let bs = params.bs()?;
    let hbar = params.hbar;
    let (u1, u2) = (d.u1, d.u2);
    let kq = smearing(q_targets, &field.q.points(), |q1, cq| (-(q1 - cq).powi(2) / (bs * bs * u2 * u2)).exp());
    let kp = smearing(p_targets, &field.p.points(), |p1, cp| (-(bs * (p1 - u1 * cp) / hbar).powi(2)).exp());
    let scale = field.q.spacing() * field.p.spacing() / (u2 * PI * hbar);
    Ok((kq, kp, scale))
}

/// Gaussian smearing of the cm Wigner function:
/// `(1/u2) ∫ dQdP/πħ W_G(Q,P) e^{-(q1-Q)²/bs²u2² - bs²(p1-u1P)²/ħ²}`.
pub fn coarse_grain(wigner_cm: &PhaseSpaceField, params: &CompositeParams, q1: f64, p1: f64) -> Result<f64> {
    let (kq, kp, scale) = coarse_kernels(params, wigner_cm, &[q1], &[p1])?;
    Ok(smear(wigner_cm, &kq, &kp, scale)[0])
}

pub fn coarse_grain_field(
    wigner_cm: &PhaseSpaceField,
    params: &CompositeParams,
    q: Grid1D,
    p: Grid1D,
) -> Result<PhaseSpaceField> {
    let (kq, kp, scale) = coarse_kernels(params, wigner_cm, &q.points(), &p.points())?;
    Ok(PhaseSpaceField {
        q,
        p,
        values: smear(wigner_cm, &kq, &kp, scale),
        measure: Measure::Wigner { hbar: params.hbar },
    })
}

/// Wigner function of `Φ_G` on its default grid.
pub fn cm_wigner_field(cm: &CmWaveFunction, hbar: f64, n: usize) -> Result<PhaseSpaceField> {
    let (q, p) = pure_state_grids(cm, n, hbar)?;
    wigner_pure_field(cm, q, p, hbar)
}

// ---------------------------------------------------------------------------
// ħ/2-Husimi function

/// Husimi function of a pure state on the phase space with Planck
/// constant `ħ/2`, smeared with squared width `alpha`:
/// `∫ dQdP/π(ħ/2) W_{ħ/2}(Q,P) e^{-(q-Q)²/α - α(p-P)²/(ħ/2)²}`.
#[derive(Debug, Clone)]
pub struct HusimiHalf {
    w_half: PhaseSpaceField,
    alpha: f64,
    hbar: f64,
}

impl HusimiHalf {
    pub fn new<S: PureState + ?Sized>(state: &S, alpha: f64, hbar: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParams(format!("smearing alpha must be > 0, got {alpha}")));
        }
        let h = 0.5 * hbar;
        let (q, p) = pure_state_grids(state, n, h)?;
        Ok(Self { w_half: wigner_pure_field(state, q, p, h)?, alpha, hbar })
    }

    /// Default smearing `alpha = bG²`.
    pub fn for_cm(cm: &CmWaveFunction, hbar: f64, n: usize) -> Result<Self> {
        Self::new(cm, cm.b_g() * cm.b_g(), hbar, n)
    }

    fn kernels(&self, qs: &[f64], ps: &[f64]) -> Smearing {
        let h = 0.5 * self.hbar;
        let alpha = self.alpha;
        let kq = smearing(qs, &self.w_half.q.points(), |q, cq| (-(q - cq).powi(2) / alpha).exp());
        let kp = smearing(ps, &self.w_half.p.points(), |p, cp| (-alpha * ((p - cp) / h).powi(2)).exp());
        let scale = self.w_half.q.spacing() * self.w_half.p.spacing() / (PI * h);
        (kq, kp, scale)
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        let (kq, kp, scale) = self.kernels(&[q], &[p]);
        smear(&self.w_half, &kq, &kp, scale)[0]
    }

    pub fn field(&self, q: Grid1D, p: Grid1D) -> PhaseSpaceField {
        let (kq, kp, scale) = self.kernels(&q.points(), &p.points());
        PhaseSpaceField {
            q,
            p,
            values: smear(&self.w_half, &kq, &kp, scale),
            measure: Measure::HusimiHalf { hbar: self.hbar },
        }
    }
}

pub fn husimi_half<S: PureState + ?Sized>(state: &S, alpha: f64, q: f64, p: f64, hbar: f64) -> Result<f64> {
    Ok(HusimiHalf::new(state, alpha, hbar, 256)?.eval(q, p))
}
