//! Position-space objects: the one-body kernel `ρ(q, q')`, its
//! semi-classical counterpart, the cm wave function, and their
//! discretisation into a [`DensityMatrix`].
//!
//! Gaussian weights are marginalised exactly with [`GaussianForm`]; any
//! other weight goes through composite Gauss-Legendre nodes in `R` whose
//! panel width is halved until the kernel trace is stable to 1e-8.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CompositeParams, WeightFunction};
use crate::numerics::{
    gauss_legendre_panels, hermitian_eigenvalues, integrate_1d, symmetric_eigenvalues,
    GaussianForm, Grid1D, QuadratureSpec,
};
use crate::numerics::gaussian_internal::Quadratic2;

const NODE_TOL: f64 = 1e-8;
const NODE_REFINEMENTS: usize = 6;
const GL_POINTS: usize = 6;
/// Packet tails beyond this many widths are dropped (e^{-40.5}).
const CUTOFF_WIDTHS: f64 = 9.0;

/// How a constant weight is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxMode {
    /// Translation-invariant bulk: the box is closed into a ring of
    /// circumference `V`, so edge effects vanish.
    #[default]
    Bulk,
    /// Hard edges at `±V/2` on the open line.
    HardEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approximation {
    Exact,
    SemiClassical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Line,
    Periodic { period: f64 },
}

/// One-body kernel, exact or semi-classical, with its Wigner transform.
#[derive(Debug, Clone)]
pub struct Kernel {
    params: CompositeParams,
    approx: Approximation,
    repr: Repr,
    raw_trace: f64,
    half_width: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    /// Unnormalised kernel and Wigner function as 2-variable Gaussian forms.
    Gaussian { kernel: Quadratic2, wigner: Quadratic2 },
    /// Normalised ring kernel `(1/V) e^{-(q-q')²/4 bs²}`.
    Ring { period: f64, bs: f64 },
    Nodes(NodeSum),
}

#[derive(Debug, Clone)]
struct NodeSum {
    r: Vec<f64>,
    /// `w_k F(R_k)` (exact) or `w_k |f(R_k)|²` (semi-classical).
    a: Vec<Complex64>,
    width: f64,
    real: bool,
}

impl NodeSum {
    fn window(&self, q: f64) -> std::ops::Range<usize> {
        let cut = CUTOFF_WIDTHS * self.width;
        let lo = self.r.partition_point(|&r| r < q - cut);
        let hi = self.r.partition_point(|&r| r <= q + cut);
        lo..hi
    }
}

impl Kernel {
    /// Exact reduced kernel of the composite (decoherence factor included).
    pub fn exact(params: &CompositeParams, w: &WeightFunction, mode: BoxMode) -> Result<Self> {
        params.validate()?;
        w.validate()?;
        match (w, mode) {
            (WeightFunction::Gaussian { b: big_b }, _) => gaussian_exact(params, *big_b),
            (WeightFunction::ConstantBox { v }, BoxMode::Bulk) => ring(params, *v, Approximation::Exact),
            _ => nodes_exact(params, w),
        }
    }

    /// Semi-classical kernel built from `|f|²` with smearing width `bs`.
    pub fn semi_classical(params: &CompositeParams, w: &WeightFunction, mode: BoxMode) -> Result<Self> {
        params.validate()?;
        w.validate()?;
        params.bs()?;
        match (w, mode) {
            (WeightFunction::Gaussian { b: big_b }, _) => gaussian_classical(params, *big_b),
            (WeightFunction::ConstantBox { v }, BoxMode::Bulk) => {
                ring(params, *v, Approximation::SemiClassical)
            }
            _ => nodes_classical(params, w),
        }
    }

    /// Exact kernel through the generic node quadrature, whatever the weight.
    pub fn exact_by_quadrature(params: &CompositeParams, w: &WeightFunction) -> Result<Self> {
        params.validate()?;
        w.validate()?;
        nodes_exact(params, w)
    }

    pub fn semi_classical_by_quadrature(params: &CompositeParams, w: &WeightFunction) -> Result<Self> {
        params.validate()?;
        w.validate()?;
        params.bs()?;
        nodes_classical(params, w)
    }

    pub fn params(&self) -> &CompositeParams {
        &self.params
    }

    pub fn approximation(&self) -> Approximation {
        self.approx
    }

    pub fn geometry(&self) -> Geometry {
        match self.repr {
            Repr::Ring { period, .. } => Geometry::Periodic { period },
            _ => Geometry::Line,
        }
    }

    /// Trace of the kernel before normalisation (per period on a ring).
    pub fn raw_trace(&self) -> f64 {
        self.raw_trace
    }

    /// Half-width of a position window holding all but ~e^{-36} of the density.
    pub fn suggested_half_width(&self) -> f64 {
        self.half_width
    }

    pub fn is_real(&self) -> bool {
        match &self.repr {
            Repr::Nodes(n) => n.real,
            _ => true,
        }
    }

    /// True when the kernel is a sum over `R` quadrature nodes rather than
    /// a closed form.
    pub fn is_node_sum(&self) -> bool {
        matches!(self.repr, Repr::Nodes(_))
    }

    /// Normalised kernel on all pairs of `pts`: real part and, for complex
    /// weights, imaginary part.
    pub fn sample_matrix(&self, pts: &[f64]) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        match &self.repr {
            Repr::Nodes(nodes) => node_matrix(self, nodes, pts),
            _ => {
                let n = pts.len();
                let rows: Vec<Vec<f64>> = (0..n)
                    .into_par_iter()
                    .map(|i| (0..=i).map(|j| self.eval(pts[i], pts[j]).re).collect())
                    .collect();
                let mut re = DMatrix::zeros(n, n);
                for (i, row) in rows.into_iter().enumerate() {
                    for (j, v) in row.into_iter().enumerate() {
                        re[(i, j)] = v;
                        re[(j, i)] = v;
                    }
                }
                (re, None)
            }
        }
    }

    /// Unnormalised kernel value.
    pub fn raw(&self, q: f64, qp: f64) -> Complex64 {
        match &self.repr {
            Repr::Gaussian { kernel, .. } => kernel.eval(q, qp),
            Repr::Ring { period, bs } => Complex64::new(ring_value(*period, *bs, q - qp), 0.0),
            Repr::Nodes(n) => match self.approx {
                Approximation::Exact => nodes_exact_value(n, self.params.u, q, qp),
                Approximation::SemiClassical => nodes_classical_value(n, q, qp),
            },
        }
    }

    /// Kernel normalised to unit trace.
    pub fn eval(&self, q: f64, qp: f64) -> Complex64 {
        self.raw(q, qp) / self.raw_trace
    }

    /// Wigner transform, normalised so that `∫ W dq dp / 2πħ = 1`.
    /// Returns the complex value; the imaginary part is quadrature residue.
    pub fn wigner_complex(&self, q: f64, p: f64) -> Complex64 {
        let hbar = self.params.hbar;
        let v = match &self.repr {
            Repr::Gaussian { wigner, .. } => wigner.eval(q, p),
            Repr::Ring { period, bs } => {
                let norm = 2.0 * bs * PI.sqrt() / period;
                Complex64::new(norm * (-(bs * p / hbar).powi(2)).exp() * self.raw_trace, 0.0)
            }
            Repr::Nodes(n) => match self.approx {
                Approximation::Exact => nodes_exact_wigner(n, &self.params, q, p),
                Approximation::SemiClassical => nodes_classical_wigner(n, hbar, q, p),
            },
        };
        v / self.raw_trace
    }

    pub fn wigner(&self, q: f64, p: f64) -> f64 {
        self.wigner_complex(q, p).re
    }
}

fn ring_value(period: f64, bs: f64, d: f64) -> f64 {
    let d = d - period * (d / period).round();
    (-1..=1)
        .map(|k| {
            let x = d + k as f64 * period;
            (-x * x / (4.0 * bs * bs)).exp()
        })
        .sum::<f64>()
        / period
}

fn ring(params: &CompositeParams, v: f64, approx: Approximation) -> Result<Kernel> {
    let bs = params.bs()?;
    Ok(Kernel {
        params: *params,
        approx,
        repr: Repr::Ring { period: v, bs },
        raw_trace: 1.0,
        half_width: 0.5 * v,
    })
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Forms over `(q, q', R, R')` for the kernel and `(q, p, R, R')` for the
/// Wigner function, then `R, R'` integrated out (or pinned to 0 when `B = 0`).
fn gaussian_exact(params: &CompositeParams, big_b: f64) -> Result<Kernel> {
    let CompositeParams { u, b, hbar, .. } = *params;
    let b2 = b * b;
    let localized = big_b == 0.0;
    let weight_log = if localized { 0.0 } else { -0.5 * (big_b * big_b * PI).ln() };

    let mut k = GaussianForm::new(4);
    k.add_diff_square(0, 2, 0.5 / b2)
        .add_diff_square(1, 3, 0.5 / b2)
        .add_diff_square(2, 3, u / (4.0 * b2))
        .add_log_prefactor(weight_log - 0.5 * (b2 * PI).ln());

    let mut w = GaussianForm::new(4);
    let shift = hbar / (2.0 * b2);
    w.add_diff_square(0, 2, 0.5 / b2)
        .add_diff_square(0, 3, 0.5 / b2)
        .add_diff_square(2, 3, u / (4.0 * b2))
        .add_square(&[c(0.0), c(1.0), Complex64::new(0.0, shift), Complex64::new(0.0, -shift)], b2 / (hbar * hbar))
        .add_log_prefactor(2f64.ln() + weight_log);

    let (k2, w2) = if localized {
        let pin = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        (k.pullback(&pin), w.pullback(&pin))
    } else {
        let inv = 1.0 / (big_b * big_b);
        k.add_var_square(2, 0.5 * inv).add_var_square(3, 0.5 * inv);
        w.add_var_square(2, 0.5 * inv).add_var_square(3, 0.5 * inv);
        (k.integrate_out(&[2, 3])?, w.integrate_out(&[2, 3])?)
    };
    let diag = k2.pullback(&DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
    let raw_trace = diag.integral()?.re;
    let bs = params.derive()?.bs.unwrap_or(b);
    Ok(Kernel {
        params: *params,
        approx: Approximation::Exact,
        repr: Repr::Gaussian { kernel: Quadratic2::from_form(&k2), wigner: Quadratic2::from_form(&w2) },
        raw_trace,
        half_width: 6.0 * (b.max(bs) + big_b),
    })
}

/// Forms over `(q, q', R)` and `(q, p, R)` with `|f(R)|² = e^{-R²/B²}/(B√π)`.
fn gaussian_classical(params: &CompositeParams, big_b: f64) -> Result<Kernel> {
    let hbar = params.hbar;
    let bs = params.bs()?;
    let bs2 = bs * bs;
    let localized = big_b == 0.0;
    let weight_log = if localized { 0.0 } else { -(big_b * PI.sqrt()).ln() };

    let mut k = GaussianForm::new(3);
    k.add_diff_square(0, 2, 0.5 / bs2)
        .add_diff_square(1, 2, 0.5 / bs2)
        .add_log_prefactor(weight_log - (bs * PI.sqrt()).ln());
    let mut w = GaussianForm::new(3);
    w.add_diff_square(0, 2, 1.0 / bs2)
        .add_var_square(1, bs2 / (hbar * hbar))
        .add_log_prefactor(2f64.ln() + weight_log);

    let (k2, w2) = if localized {
        let pin = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        (k.pullback(&pin), w.pullback(&pin))
    } else {
        let inv = 1.0 / (big_b * big_b);
        k.add_var_square(2, inv);
        w.add_var_square(2, inv);
        (k.integrate_out(&[2])?, w.integrate_out(&[2])?)
    };
    let diag = k2.pullback(&DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
    let raw_trace = diag.integral()?.re;
    Ok(Kernel {
        params: *params,
        approx: Approximation::SemiClassical,
        repr: Repr::Gaussian { kernel: Quadratic2::from_form(&k2), wigner: Quadratic2::from_form(&w2) },
        raw_trace,
        half_width: 6.0 * (params.b.max(bs) + big_b),
    })
}

/// Panel breakpoints for the `R` quadrature of a weight.
fn panel_breaks(w: &WeightFunction, h: f64) -> Result<Vec<f64>> {
    let split = |lo: f64, hi: f64, out: &mut Vec<f64>| {
        let k = ((hi - lo) / h).ceil().max(1.0) as usize;
        for i in 1..=k {
            out.push(lo + (hi - lo) * i as f64 / k as f64);
        }
    };
    let mut breaks = Vec::new();
    match w {
        WeightFunction::Gaussian { b } if *b == 0.0 => {
            return Err(Error::InvalidParams(
                "B = 0 weight has no node quadrature; use the exact Gaussian kernel".into(),
            ))
        }
        WeightFunction::Tabulated(t) => {
            let r = t.nodes();
            breaks.push(r[0]);
            for s in r.windows(2) {
                split(s[0], s[1], &mut breaks);
            }
        }
        _ => {
            let (lo, hi) = w.support();
            breaks.push(lo);
            split(lo, hi, &mut breaks);
        }
    }
    Ok(breaks)
}

/// Nodes `(R_k, w_k)` refined until `trace(nodes)` is stable.
fn converged_nodes<A, T>(
    w: &WeightFunction,
    h0: f64,
    amplitude: A,
    trace: T,
) -> Result<(Vec<f64>, Vec<Complex64>, f64)>
where
    A: Fn(f64) -> Result<Complex64>,
    T: Fn(&[f64], &[Complex64]) -> f64,
{
    // panels narrower than h (table intervals) need fewer points
    let build = |h: f64| -> Result<(Vec<f64>, Vec<Complex64>)> {
        let breaks = panel_breaks(w, h)?;
        let mut r = Vec::new();
        let mut a = Vec::new();
        for s in breaks.windows(2) {
            let pts = ((GL_POINTS as f64 * (s[1] - s[0]) / h).ceil() as usize).clamp(2, GL_POINTS);
            for (x, wt) in gauss_legendre_panels(s, pts) {
                r.push(x);
                a.push(amplitude(x)? * wt);
            }
        }
        Ok((r, a))
    };
    let mut h = h0;
    let (mut r, mut a) = build(h)?;
    let mut t = trace(&r, &a);
    let mut change = f64::INFINITY;
    let mut refinements = 0;
    for _ in 0..4 * NODE_REFINEMENTS {
        h *= 0.5;
        let (r2, a2) = build(h)?;
        if r2.len() == r.len() {
            continue;
        }
        let t2 = trace(&r2, &a2);
        change = ((t2 - t) / t2).abs();
        (r, a, t) = (r2, a2, t2);
        if change <= NODE_TOL {
            return Ok((r, a, t));
        }
        refinements += 1;
        if refinements == NODE_REFINEMENTS {
            break;
        }
    }
    Err(Error::QuadratureNotConverged { refinements, change, tol: NODE_TOL })
}

fn initial_panel(w: &WeightFunction, scales: &[f64]) -> f64 {
    let mut h = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if let WeightFunction::Gaussian { b } = w {
        h = h.min(*b);
    }
    h
}

fn nodes_exact(params: &CompositeParams, w: &WeightFunction) -> Result<Kernel> {
    let CompositeParams { u, b, .. } = *params;
    let mut scales = vec![b];
    if u > 0.0 {
        scales.push(2.0 * b / u.sqrt());
    }
    let h0 = initial_panel(w, &scales);
    let decay = (u + 1.0) / (4.0 * b * b);
    let trace = |r: &[f64], a: &[Complex64]| -> f64 {
        let cut = CUTOFF_WIDTHS * 2.0 * b;
        (0..r.len())
            .into_par_iter()
            .map(|i| {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..r.len() {
                    let d = r[i] - r[j];
                    if d.abs() < cut {
                        s += a[i] * a[j].conj() * (-decay * d * d).exp();
                    }
                }
                s.re
            })
            .sum()
    };
    let (r, a, raw_trace) = converged_nodes(w, h0, |x| w.eval(x), trace)?;
    let (lo, hi) = w.support();
    Ok(Kernel {
        params: *params,
        approx: Approximation::Exact,
        repr: Repr::Nodes(NodeSum { r, a, width: b, real: w.is_real() }),
        raw_trace,
        half_width: lo.abs().max(hi.abs()) + 6.0 * b.max(params.derive()?.bs.unwrap_or(b)),
    })
}

fn nodes_classical(params: &CompositeParams, w: &WeightFunction) -> Result<Kernel> {
    let bs = params.bs()?;
    let h0 = initial_panel(w, &[bs]);
    let squared = |x: f64| Ok(Complex64::new(w.eval(x)?.norm_sqr(), 0.0));
    let norm2 = |_: &[f64], a: &[Complex64]| -> f64 { a.iter().map(|z| z.re).sum() };
    let (r, a, total) = converged_nodes(w, h0, squared, norm2)?;
    // f = F/‖F‖, so the node weights of |f|² sum to one
    let a = a.into_iter().map(|z| z / total).collect();
    let (lo, hi) = w.support();
    Ok(Kernel {
        params: *params,
        approx: Approximation::SemiClassical,
        repr: Repr::Nodes(NodeSum { r, a, width: bs, real: true }),
        raw_trace: 1.0,
        half_width: lo.abs().max(hi.abs()) + 6.0 * bs,
    })
}

fn nodes_exact_value(n: &NodeSum, u: f64, q: f64, qp: f64) -> Complex64 {
    let b2 = n.width * n.width;
    let (wi, wj) = (n.window(q), n.window(qp));
    let xs: Vec<(f64, Complex64)> = wi
        .map(|i| (n.r[i], n.a[i] * (-(q - n.r[i]).powi(2) / (2.0 * b2)).exp()))
        .collect();
    let ys: Vec<(f64, Complex64)> = wj
        .map(|j| (n.r[j], n.a[j].conj() * (-(qp - n.r[j]).powi(2) / (2.0 * b2)).exp()))
        .collect();
    let decay = u / (4.0 * b2);
    let mut s = Complex64::new(0.0, 0.0);
    for &(ri, xi) in &xs {
        let mut row = Complex64::new(0.0, 0.0);
        for &(rj, yj) in &ys {
            row += yj * (-decay * (ri - rj).powi(2)).exp();
        }
        s += xi * row;
    }
    s / (n.width * PI.sqrt())
}

fn nodes_classical_value(n: &NodeSum, q: f64, qp: f64) -> Complex64 {
    let bs2 = n.width * n.width;
    let mid = 0.5 * (q + qp);
    let s: f64 = n
        .window(mid)
        .map(|k| n.a[k].re * (-((q - n.r[k]).powi(2) + (qp - n.r[k]).powi(2)) / (2.0 * bs2)).exp())
        .sum();
    Complex64::new(s / (n.width * PI.sqrt()), 0.0)
}

fn nodes_exact_wigner(n: &NodeSum, params: &CompositeParams, q: f64, p: f64) -> Complex64 {
    let CompositeParams { u, b, hbar, .. } = *params;
    let b2 = b * b;
    let xs: Vec<(f64, Complex64)> = n
        .window(q)
        .map(|i| {
            let amp = n.a[i] * Complex64::from_polar(1.0, -p * n.r[i] / hbar);
            (n.r[i], amp)
        })
        .collect();
    let mut s = Complex64::new(0.0, 0.0);
    for &(ri, xi) in &xs {
        for &(rj, xj) in &xs {
            let e = -(q - ri).powi(2) / (2.0 * b2) - (q - rj).powi(2) / (2.0 * b2)
                - (u - 1.0) * (ri - rj).powi(2) / (4.0 * b2);
            s += xi * xj.conj() * e.exp();
        }
    }
    s * 2.0 * (-(b * p / hbar).powi(2)).exp()
}

fn nodes_classical_wigner(n: &NodeSum, hbar: f64, q: f64, p: f64) -> Complex64 {
    let bs2 = n.width * n.width;
    let s: f64 = n.window(q).map(|k| n.a[k].re * (-(n.r[k] - q).powi(2) / bs2).exp()).sum();
    Complex64::new(2.0 * s * (-bs2 * p * p / (hbar * hbar)).exp(), 0.0)
}

/// Exact kernel value, normalised to unit trace (box weights in bulk mode).
pub fn rho_kernel(params: &CompositeParams, w: &WeightFunction, q: f64, qp: f64) -> Result<Complex64> {
    Ok(Kernel::exact(params, w, BoxMode::Bulk)?.eval(q, qp))
}

pub fn rho_cl_kernel(params: &CompositeParams, w: &WeightFunction, q: f64, qp: f64) -> Result<Complex64> {
    Ok(Kernel::semi_classical(params, w, BoxMode::Bulk)?.eval(q, qp))
}

// ---------------------------------------------------------------------------
// cm wave function

/// Normalised cm wave function `Φ_G(r_G)`.
#[derive(Debug, Clone)]
pub struct CmWaveFunction {
    repr: CmRepr,
    scale: f64,
    b_g: f64,
    extent: (f64, f64),
}

#[derive(Debug, Clone)]
enum CmRepr {
    /// `exp(c + j x - ½ a x²)` from the Gaussian convolution.
    Gaussian { a: Complex64, j: Complex64, c: Complex64 },
    Box { v: f64 },
    Nodes { r: Vec<f64>, a: Vec<Complex64> },
}

impl CmWaveFunction {
    pub fn b_g(&self) -> f64 {
        self.b_g
    }

    /// Interval outside which `|Φ_G|` is negligible.
    pub fn extent(&self) -> (f64, f64) {
        self.extent
    }

    /// Shortest length over which `Φ_G` varies; sets its momentum bandwidth.
    pub fn momentum_length(&self) -> f64 {
        match &self.repr {
            CmRepr::Gaussian { a, .. } => a.re.sqrt().recip(),
            _ => self.b_g,
        }
    }

    fn raw(&self, x: f64) -> Complex64 {
        let bg2 = self.b_g * self.b_g;
        let pref = (bg2 * PI).powf(-0.25);
        match &self.repr {
            CmRepr::Gaussian { a, j, c } => (*c + *j * x - 0.5 * *a * x * x).exp(),
            CmRepr::Box { v } => {
                let s = std::f64::consts::SQRT_2 * self.b_g;
                let val = self.b_g * (0.5 * PI).sqrt()
                    * (libm::erf((x + 0.5 * v) / s) - libm::erf((x - 0.5 * v) / s));
                Complex64::new(pref * val, 0.0)
            }
            CmRepr::Nodes { r, a } => {
                let cut = CUTOFF_WIDTHS * self.b_g;
                let lo = r.partition_point(|&rk| rk < x - cut);
                let hi = r.partition_point(|&rk| rk <= x + cut);
                (lo..hi)
                    .map(|k| a[k] * (-(x - r[k]).powi(2) / (2.0 * bg2)).exp())
                    .sum::<Complex64>()
                    * pref
            }
        }
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        self.raw(x) * self.scale
    }
}

pub fn cm_wavefunction(params: &CompositeParams, w: &WeightFunction) -> Result<CmWaveFunction> {
    let d = params.derive()?;
    w.validate()?;
    let b_g = d.b_g;
    let (repr, extent) = match w {
        WeightFunction::Gaussian { b: big_b } => {
            let bg2 = b_g * b_g;
            let mut f = GaussianForm::new(2);
            f.add_diff_square(0, 1, 0.5 / bg2).add_log_prefactor(-0.25 * (bg2 * PI).ln());
            let g = if *big_b == 0.0 {
                f.pullback(&DMatrix::from_row_slice(2, 1, &[1.0, 0.0]))
            } else {
                f.add_var_square(1, 0.5 / (big_b * big_b))
                    .add_log_prefactor(-0.25 * (big_b * big_b * PI).ln());
                f.integrate_out(&[1])?
            };
            let half = 8.0 * d.beta(*big_b);
            (CmRepr::Gaussian { a: g.a[(0, 0)], j: g.j[0], c: g.c }, (-half, half))
        }
        WeightFunction::ConstantBox { v } => {
            (CmRepr::Box { v: *v }, (-0.5 * v - 8.0 * b_g, 0.5 * v + 8.0 * b_g))
        }
        WeightFunction::Tabulated(_) => {
            let (r, a, _) = converged_nodes(w, b_g, |x| w.eval(x), |r, a| {
                // ∫|Φ|² ∝ Σ a_i a_j* e^{-(R_i-R_j)²/4bG²}
                let mut s = 0.0;
                for i in 0..r.len() {
                    for j in 0..r.len() {
                        let d = r[i] - r[j];
                        s += (a[i] * a[j].conj()).re * (-d * d / (4.0 * b_g * b_g)).exp();
                    }
                }
                s
            })?;
            let (lo, hi) = w.support();
            (CmRepr::Nodes { r, a }, (lo - 8.0 * b_g, hi + 8.0 * b_g))
        }
    };
    let mut psi = CmWaveFunction { repr, scale: 1.0, b_g, extent };
    let spec = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-300, ..Default::default() };
    let norm = integrate_1d(|x| psi.raw(x).norm_sqr(), extent.0, extent.1, &spec)?.value;
    if !(norm > 0.0) {
        return Err(Error::InvalidParams("weight function has zero norm".into()));
    }
    psi.scale = norm.sqrt().recip();
    Ok(psi)
}

// ---------------------------------------------------------------------------
// density matrix

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    /// Position window `[-L, L]`; `None` uses the kernel's suggestion.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 1024, half_width: None }
    }
}

const MASS_TOL: f64 = 1e-8;
const TRACE_STABILITY: f64 = 1e-6;

/// Kernel samples `ρ(q_i, q_j)` on a uniform grid, renormalised so that
/// `Δq Σ_i ρ(q_i, q_i) = 1`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub grid: Grid1D,
    pub geometry: Geometry,
    pub re: DMatrix<f64>,
    /// Imaginary part, present only for complex weights.
    pub im: Option<DMatrix<f64>>,
    /// `Δq Σ ρ(q_i, q_i)` of the normalised kernel before renormalisation.
    pub grid_trace: f64,
}

impl DensityMatrix {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn dq(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn trace(&self) -> f64 {
        self.dq() * self.re.trace()
    }

    /// `Tr ρ² = Δq² Σ_ij |ρ_ij|²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        let dq2 = self.dq() * self.dq();
        let re2: f64 = self.re.iter().map(|x| x * x).sum();
        let im2: f64 = self.im.as_ref().map_or(0.0, |m| m.iter().map(|x| x * x).sum());
        dq2 * (re2 + im2)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.re[(i, j)] - self.re[(j, i)]).abs());
                if let Some(im) = &self.im {
                    worst = worst.max((im[(i, j)] + im[(j, i)]).abs());
                }
            }
        }
        worst
    }

    /// Eigenvalues of the operator `Δq·ρ`, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let dq = self.dq();
        match &self.im {
            None => symmetric_eigenvalues(&(&self.re * dq)),
            Some(im) => {
                let m = DMatrix::from_fn(self.n(), self.n(), |i, j| {
                    Complex64::new(self.re[(i, j)], im[(i, j)]) * dq
                });
                hermitian_eigenvalues(&m)
            }
        }
    }
}

fn grid_for(kernel: &Kernel, n: usize, half_width: f64) -> Result<Grid1D> {
    match kernel.geometry() {
        Geometry::Periodic { period } => Grid1D::periodic(-0.5 * period, period, n),
        Geometry::Line => Grid1D::symmetric(half_width, n),
    }
}

fn diagonal_mass(kernel: &Kernel, grid: &Grid1D) -> f64 {
    let pts = grid.points();
    let s: f64 = pts.par_iter().map(|&q| kernel.eval(q, q).re).sum();
    let ends = match kernel.geometry() {
        Geometry::Periodic { .. } => 0.0,
        Geometry::Line => 0.5 * (kernel.eval(pts[0], pts[0]).re + kernel.eval(grid.hi, grid.hi).re),
    };
    (s - ends) * grid.spacing()
}

pub fn rho_matrix(kernel: &Kernel, spec: &GridSpec) -> Result<DensityMatrix> {
    if spec.n < 64 {
        return Err(Error::InvalidParams(format!("density matrix needs N >= 64, got {}", spec.n)));
    }
    let mut half = spec.half_width.unwrap_or_else(|| kernel.suggested_half_width());
    let mut grid = grid_for(kernel, spec.n, half)?;
    let mut mass = diagonal_mass(kernel, &grid);
    if kernel.geometry() == Geometry::Line {
        for _ in 0..8 {
            if (1.0 - mass).abs() < MASS_TOL {
                break;
            }
            half *= 1.5;
            grid = grid_for(kernel, spec.n, half)?;
            mass = diagonal_mass(kernel, &grid);
        }
    }
    let fine = match kernel.geometry() {
        Geometry::Periodic { period } => Grid1D::periodic(-0.5 * period, period, 2 * spec.n)?,
        Geometry::Line => grid.refined(),
    };
    let fine_mass = diagonal_mass(kernel, &fine);
    let change = ((fine_mass - mass) / fine_mass).abs();
    if change > TRACE_STABILITY {
        return Err(Error::GridTooCoarse { n: spec.n, change });
    }

    let (re, im) = kernel.sample_matrix(&grid.points());
    let scale = 1.0 / mass;
    Ok(DensityMatrix {
        grid,
        geometry: kernel.geometry(),
        re: re * scale,
        im: im.map(|m| m * scale),
        grid_trace: mass,
    })
}

/// `ρ = X D X^†` (exact) or `Y diag(a) Yᵀ` (semi-classical) in matrix form.
fn node_matrix(kernel: &Kernel, nodes: &NodeSum, pts: &[f64]) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
    let n = pts.len();
    let m = nodes.r.len();
    let w2 = nodes.width * nodes.width;
    let norm = 1.0 / (nodes.width * PI.sqrt() * kernel.raw_trace);
    let g = |i: usize, k: usize| (-(pts[i] - nodes.r[k]).powi(2) / (2.0 * w2)).exp();
    match kernel.approx {
        Approximation::SemiClassical => {
            let y = DMatrix::from_fn(n, m, &g);
            let ya = DMatrix::from_fn(n, m, |i, k| y[(i, k)] * nodes.a[k].re);
            let mut re = &ya * y.transpose() * norm;
            re = (&re + re.transpose()) * 0.5;
            (re, None)
        }
        Approximation::Exact => {
            let decay = kernel.params.u / (4.0 * w2);
            let d = DMatrix::from_fn(m, m, |k, l| (-decay * (nodes.r[k] - nodes.r[l]).powi(2)).exp());
            if nodes.real {
                let x = DMatrix::from_fn(n, m, |i, k| g(i, k) * nodes.a[k].re);
                let mut re = &x * (&d * x.transpose()) * norm;
                re = (&re + re.transpose()) * 0.5;
                (re, None)
            } else {
                let x = DMatrix::from_fn(n, m, |i, k| nodes.a[k] * g(i, k));
                let dc = d.map(|v| Complex64::new(v, 0.0));
                let rho = &x * (&dc * x.adjoint());
                let re = DMatrix::from_fn(n, n, |i, j| 0.5 * (rho[(i, j)].re + rho[(j, i)].re) * norm);
                let im = DMatrix::from_fn(n, n, |i, j| 0.5 * (rho[(i, j)].im - rho[(j, i)].im) * norm);
                (re, Some(im))
            }
        }
    }
}
