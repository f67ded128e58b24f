use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};

use gauss_quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Trapezoid,
    /// Whole-line rule; `integrate_1d` reads `[lo, hi]` as `mean ± 6·scale`.
    GaussHermite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// Starting number of trapezoid intervals (or Gauss-Hermite order).
    pub initial_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::Trapezoid,
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_refinements: 16,
            initial_points: 32,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams("quadrature tolerances must be > 0".into()));
        }
        if self.max_refinements > 20 {
            return Err(Error::InvalidParams("max_refinements must be <= 20".into()));
        }
        if self.initial_points < 2 {
            return Err(Error::InvalidParams("initial_points must be >= 2".into()));
        }
        Ok(())
    }
}

/// Converged value with the size of the last refinement step as error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

pub fn integrate_1d<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral<f64>>
where
    F: Fn(f64) -> f64,
{
    match spec.scheme {
        Scheme::Trapezoid => trapezoid(f, lo, hi, spec),
        Scheme::GaussHermite => {
            gauss_hermite(f, 0.5 * (lo + hi), (hi - lo) / 12.0, spec)
        }
    }
}

pub fn integrate_1d_complex<F>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    trapezoid(f, lo, hi, spec)
}

/// Trapezoid rule with interval doubling; old abscissae are reused.
fn trapezoid<T, F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral<T>>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(hi > lo) {
        return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
    }
    let mut n = spec.initial_points;
    let mut h = (hi - lo) / n as f64;
    let mut sum = (f(lo) + f(hi)) * 0.5;
    for i in 1..n {
        sum = sum + f(lo + i as f64 * h);
    }
    let mut evaluations = n + 1;
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for level in 1..=spec.max_refinements {
        let mut mid = T::zero();
        for i in 0..n {
            mid = mid + f(lo + (i as f64 + 0.5) * h);
        }
        evaluations += n;
        sum = sum + mid;
        n *= 2;
        h *= 0.5;
        let refined = sum * h;
        change = (refined - estimate).magnitude();
        estimate = refined;
        let tol = spec.abs_tol.max(spec.rel_tol * estimate.magnitude());
        if level >= 2 && change <= tol {
            return Ok(Integral { value: estimate, error: change, evaluations });
        }
    }
    Err(Error::QuadratureNotConverged {
        refinements: spec.max_refinements,
        change,
        tol: spec.abs_tol.max(spec.rel_tol * estimate.magnitude()),
    })
}

/// `∫_ℝ f(x) dx` for integrands that decay like a Gaussian of width
/// `scale` around `center`. The order doubles until successive results agree.
pub fn gauss_hermite<F>(f: F, center: f64, scale: f64, spec: &QuadratureSpec) -> Result<Integral<f64>>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(scale > 0.0) {
        return Err(Error::InvalidParams(format!("Gauss-Hermite scale must be > 0, got {scale}")));
    }
    let eval = |order: usize| -> f64 {
        let rule = GaussHermite::new(NonZeroUsize::new(order).expect("order > 0"));
        rule.as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| w * (t * t).exp() * f(center + scale * t))
            .sum::<f64>()
            * scale
    };
    // Node weights times e^{t²} overflow past order ~ 200.
    let mut order = spec.initial_points.clamp(2, 16);
    let mut estimate = eval(order);
    let mut evaluations = order;
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_refinements {
        let next = (order * 2).min(160);
        if next == order {
            break;
        }
        order = next;
        let refined = eval(order);
        evaluations += order;
        change = (refined - estimate).abs();
        estimate = refined;
        if change <= spec.abs_tol.max(spec.rel_tol * estimate.abs()) {
            return Ok(Integral { value: estimate, error: change, evaluations });
        }
    }
    Err(Error::QuadratureNotConverged {
        refinements: spec.max_refinements,
        change,
        tol: spec.abs_tol.max(spec.rel_tol * estimate.abs()),
    })
}

/// Composite Gauss-Legendre nodes and weights over consecutive panels
/// `[breaks[k], breaks[k+1]]`.
pub fn gauss_legendre_panels(breaks: &[f64], per_panel: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(per_panel.max(1)).expect("nonzero"));
    let pairs = rule.as_node_weight_pairs();
    let mut out = Vec::with_capacity(pairs.len() * breaks.len().saturating_sub(1));
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(pairs.iter().map(|&(t, wt)| (mid + half * t, half * wt)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tight() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() }
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate_1d(|x| (-x * x).exp(), -10.0, 10.0, &tight()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-8);
        assert!((r.value - PI.sqrt()).abs() <= r.error.max(1e-15));
    }

    #[test]
    fn odd_integrand_vanishes() {
        let r = integrate_1d(|x| x * (-x * x).exp(), -10.0, 10.0, &tight()).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn normalized_gaussian() {
        let r = integrate_1d(|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), -12.0, 12.0, &tight())
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
        assert!((r.value - 1.0).abs() <= r.error.max(1e-15));
    }

    #[test]
    fn hermite_matches_trapezoid() {
        let spec = QuadratureSpec { scheme: Scheme::GaussHermite, ..tight() };
        let f = |x: f64| (-(x - 1.0).powi(2) / 2.0).exp() * (1.0 + x * x);
        let gh = gauss_hermite(f, 1.0, 2f64.sqrt(), &spec).unwrap();
        let tr = integrate_1d(f, -20.0, 20.0, &tight()).unwrap();
        // ∫ e^{-(x-1)²/2}(1+x²) = √(2π)(1 + 1 + 1)
        let exact = 3.0 * (2.0 * PI).sqrt();
        assert!((gh.value - exact).abs() < 1e-10);
        assert!((tr.value - exact).abs() < 1e-10);
    }

    #[test]
    fn complex_oscillatory_integrand() {
        // ∫ e^{-x²} e^{-ikx} dx = √π e^{-k²/4}
        let k = 1.5;
        let r = integrate_1d_complex(
            |x| Complex64::from_polar((-x * x).exp(), -k * x),
            -10.0,
            10.0,
            &tight(),
        )
        .unwrap();
        assert!((r.value.re - PI.sqrt() * (-k * k / 4.0).exp()).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec { max_refinements: 3, ..tight() };
        let err = integrate_1d(|x| (50.0 * x).sin().abs(), 0.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec { max_refinements: 21, ..Default::default() };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &spec).is_err());
        let spec = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &spec).is_err());
    }

    #[test]
    fn legendre_panels_integrate_polynomials_exactly() {
        let nodes = gauss_legendre_panels(&[-1.0, 0.5, 2.0, 3.0], 4);
        let s: f64 = nodes.iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert!((s - (3f64.powi(8) - 1.0) / 8.0).abs() < 1e-10);
    }
}
