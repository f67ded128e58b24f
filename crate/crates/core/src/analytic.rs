//! Closed-form entropies and Wigner functions for the box and Gaussian
//! weights.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::CompositeParams;

/// Smallest box `V_eff` for which the bulk formulas are trusted.
pub const BOX_VALIDITY: f64 = 10.0;

/// `γ = (1 + (u+1)v²) / (1 + u v²)`.
pub fn gamma(u: f64, v_eff: f64) -> f64 {
    let v2 = v_eff * v_eff;
    (1.0 + (u + 1.0) * v2) / (1.0 + u * v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormCase {
    ConstantBox,
    Gaussian,
    GaussianLargeU,
}

pub type WignerClosure = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ClosedFormReport {
    pub case: ClosedFormCase,
    pub gamma: Option<f64>,
    pub s_r2: f64,
    /// Known only for the box.
    pub s_vn: Option<f64>,
    pub s_wsh: f64,
    pub s_r2_cl: Option<f64>,
    pub s_wsh_cl: Option<f64>,
    pub wigner: Option<WignerClosure>,
    pub wigner_cl: Option<WignerClosure>,
}

impl std::fmt::Debug for ClosedFormReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosedFormReport")
            .field("case", &self.case)
            .field("gamma", &self.gamma)
            .field("s_r2", &self.s_r2)
            .field("s_vn", &self.s_vn)
            .field("s_wsh", &self.s_wsh)
            .field("s_r2_cl", &self.s_r2_cl)
            .field("s_wsh_cl", &self.s_wsh_cl)
            .finish_non_exhaustive()
    }
}

fn shift() -> f64 {
    1.0 - 2f64.ln()
}

/// Box of length `v` in bulk evaluation.
pub fn closed_form_constant(params: &CompositeParams, v: f64) -> Result<ClosedFormReport> {
    let bs = params.bs()?;
    let v_eff = v / bs;
    if !(v_eff >= BOX_VALIDITY) {
        return Err(Error::OutOfValidity(format!(
            "box closed form needs V_eff >= {BOX_VALIDITY}, got {v_eff}"
        )));
    }
    let s_r2 = v_eff.ln() - 0.5 * (2.0 * PI).ln();
    let s_vn = s_r2 + 0.5 * shift();
    let hbar = params.hbar;
    let w: WignerClosure = Arc::new(move |_q, p| 2.0 * bs * PI.sqrt() / v * (-(bs * p / hbar).powi(2)).exp());
    Ok(ClosedFormReport {
        case: ClosedFormCase::ConstantBox,
        gamma: None,
        s_r2,
        s_vn: Some(s_vn),
        s_wsh: s_vn,
        s_r2_cl: Some(s_r2),
        s_wsh_cl: Some(s_vn),
        wigner: Some(w.clone()),
        wigner_cl: Some(w),
    })
}

/// Gaussian weight of width `big_b`.
pub fn closed_form_gaussian(params: &CompositeParams, big_b: f64) -> Result<ClosedFormReport> {
    let d = params.derive()?;
    if !(big_b >= 0.0) {
        return Err(Error::InvalidParams(format!("B must be >= 0, got {big_b}")));
    }
    let CompositeParams { u, b, hbar, .. } = *params;
    let v = big_b / b;
    let g = gamma(u, v);
    let s_r2 = 0.5 * (1.0 + v * v).ln() - 0.5 * g.ln();

    // W = 2√γ (b/σ) exp(-q²/σ² - γ b² p²/ħ²) with σ² = b² + B²
    let sigma2 = b * b + big_b * big_b;
    let amp = 2.0 * g.sqrt() * b / sigma2.sqrt();
    let wigner: WignerClosure = Arc::new(move |q, p| amp * (-q * q / sigma2 - g * (b * p / hbar).powi(2)).exp());

    let (s_r2_cl, s_wsh_cl, wigner_cl) = match d.bs {
        Some(bs) => {
            let vc = big_b / bs;
            let s = 0.5 * (1.0 + vc * vc).ln();
            let sc2 = bs * bs + big_b * big_b;
            let ampc = 2.0 * bs / sc2.sqrt();
            let wc: WignerClosure = Arc::new(move |q, p| ampc * (-q * q / sc2 - (bs * p / hbar).powi(2)).exp());
            (Some(s), Some(s + shift()), Some(wc))
        }
        None => (None, None, None),
    };
    Ok(ClosedFormReport {
        case: ClosedFormCase::Gaussian,
        gamma: Some(g),
        s_r2,
        s_vn: None,
        s_wsh: s_r2 + shift(),
        s_r2_cl,
        s_wsh_cl,
        wigner: Some(wigner),
        wigner_cl,
    })
}

/// `u → ∞` limit of the Gaussian Rényi-2 entropy, `½ ln(1 + v²)`.
pub fn closed_form_gaussian_large_u(v_eff: f64) -> f64 {
    0.5 * (1.0 + v_eff * v_eff).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BoxMode, Kernel};
    use crate::model::WeightFunction;
    use proptest::prelude::*;

    fn p(u: f64) -> CompositeParams {
        CompositeParams::natural(u)
    }

    #[test]
    fn gaussian_reference_values() {
        let r = closed_form_gaussian(&p(1.0), 2.0).unwrap();
        assert!((r.gamma.unwrap() - 1.8).abs() < 1e-15);
        assert!((r.s_r2 - 0.51083).abs() < 1e-5);
        assert!((r.s_r2.exp() - 5.0 / 3.0).abs() < 1e-12);
        assert!((r.s_wsh - 0.81768).abs() < 1e-5);
        assert!((r.s_r2_cl.unwrap() - 0.54931).abs() < 1e-5);
        assert!((r.wigner.as_ref().unwrap()(0.0, 0.0) - 1.2).abs() < 1e-12);
        let zero = closed_form_gaussian(&p(3.0), 0.0).unwrap();
        assert!(zero.s_r2.abs() < 1e-15);
        assert!((zero.s_wsh - 0.30685).abs() < 1e-5);
        assert!(closed_form_gaussian(&p(0.0), 5.0).unwrap().s_r2.abs() < 1e-14);
        assert!(closed_form_gaussian(&p(0.0), 5.0).unwrap().s_r2_cl.is_none());
    }

    #[test]
    fn box_reference_values() {
        let params = p(1.0);
        let bs = params.bs().unwrap();
        let r = closed_form_constant(&params, 100.0 * bs).unwrap();
        assert!((r.s_r2 - 3.68623).abs() < 1e-5);
        assert!((r.s_vn.unwrap() - 3.83966).abs() < 1e-5);
        assert!((r.wigner.as_ref().unwrap()(3.0, 0.0) - 2.0 * PI.sqrt() / 100.0).abs() < 1e-14);
        let small = closed_form_constant(&params, (2.0 * PI).sqrt() * bs);
        assert!(matches!(small, Err(Error::OutOfValidity(_))));
    }

    #[test]
    fn large_u_limit() {
        assert!((closed_form_gaussian_large_u(2.0) - 0.80472).abs() < 1e-5);
        assert_eq!(closed_form_gaussian_large_u(0.0), 0.0);
        let far = closed_form_gaussian(&p(1e4), 2.0).unwrap().s_r2;
        assert!((far - closed_form_gaussian_large_u(2.0)).abs() < 1e-3);
    }

    #[test]
    fn closures_match_kernel_wigner() {
        for u in [0.5, 1.0, 8.0] {
            let params = p(u);
            let r = closed_form_gaussian(&params, 1.7).unwrap();
            let w = WeightFunction::gaussian(1.7).unwrap();
            let k = Kernel::exact(&params, &w, BoxMode::Bulk).unwrap();
            let kc = Kernel::semi_classical(&params, &w, BoxMode::Bulk).unwrap();
            for &(q, pp) in &[(0.0, 0.0), (1.1, -0.4), (-2.3, 0.9)] {
                assert!((r.wigner.as_ref().unwrap()(q, pp) - k.wigner(q, pp)).abs() < 1e-12);
                assert!((r.wigner_cl.as_ref().unwrap()(q, pp) - kc.wigner(q, pp)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_identities(u in 0.0f64..100.0, v in 0.0f64..50.0) {
            prop_assert!(gamma(u, v) >= 1.0);
            prop_assert_eq!(gamma(u, 0.0), 1.0);
            prop_assert!((gamma(0.0, v) - (1.0 + v * v)).abs() <= 1e-15 * (1.0 + v * v));
        }

        #[test]
        fn shifts_are_constant(u in 0.01f64..50.0, big_b in 0.0f64..10.0) {
            let r = closed_form_gaussian(&p(u), big_b).unwrap();
            prop_assert!((r.s_wsh - r.s_r2 - (1.0 - 2f64.ln())).abs() < 1e-12);
            prop_assert!(r.s_r2 >= -1e-15);
            prop_assert!(r.s_r2 <= closed_form_gaussian_large_u(big_b) + 1e-12);
        }
    }
}
