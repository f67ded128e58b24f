//! Physical inputs, derived widths and mass fractions, and the
//! generator-coordinate weight `F(R)`.
//!
//! Particle a (mass `m`, packet width `b`) and particle b (mass `u·m`,
//! width `b/√u`) sit in a common Gaussian packet centred at `R`; the
//! composite state superposes such packets with amplitude `F(R)`.
//!
//! The binding potential of the intrinsic motion is written in the
//! literature as `U_ho(μ, b_s; r) = -ħ² r² / 2μ b_s⁴`. It only fixes the
//! Gaussian intrinsic state and is not used numerically here.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeParams {
    /// Mass ratio of particle b to particle a.
    pub u: f64,
    /// Packet width of particle a.
    pub b: f64,
    pub hbar: f64,
    /// Mass of particle a.
    pub m: f64,
}

impl CompositeParams {
    /// Natural units `b = ħ = m = 1`.
    pub fn natural(u: f64) -> Self {
        Self { u, b: 1.0, hbar: 1.0, m: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u >= 0.0) || !self.u.is_finite() {
            return Err(Error::InvalidParams(format!("u must be >= 0, got {}", self.u)));
        }
        for (name, v) in [("b", self.b), ("hbar", self.hbar), ("m", self.m)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        derive_params(self)
    }

    /// Single-particle smearing width `b/√u2`; `InvalidParams` when `u = 0`.
    pub fn bs(&self) -> Result<f64> {
        self.derive()?
            .bs
            .ok_or_else(|| Error::InvalidParams("u = 0: bs undefined (no second particle)".into()))
    }
}

/// Quantities fixed by `(u, b, m)`. Fields that need `u > 0` are `None` at `u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub u1: f64,
    pub u2: f64,
    pub b2: Option<f64>,
    pub b_g: f64,
    pub bs: Option<f64>,
    pub mu: Option<f64>,
    pub total_mass: f64,
    b: f64,
}

impl DerivedParams {
    /// Width `√(B² + u1 b²)` of the cm ground state for a Gaussian weight of width `B`.
    pub fn beta(&self, big_b: f64) -> f64 {
        (big_b * big_b + self.u1 * self.b * self.b).sqrt()
    }
}

pub fn derive_params(params: &CompositeParams) -> Result<DerivedParams> {
    params.validate()?;
    let CompositeParams { u, b, m, .. } = *params;
    let u1 = 1.0 / (u + 1.0);
    let u2 = u / (u + 1.0);
    let positive = u > 0.0;
    Ok(DerivedParams {
        u1,
        u2,
        b2: positive.then(|| b / u.sqrt()),
        b_g: u1.sqrt() * b,
        bs: positive.then(|| b / u2.sqrt()),
        mu: positive.then_some(u2 * m),
        total_mass: (u + 1.0) * m,
        b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// `F = 1` on `[-V/2, V/2]`.
    ConstantBox { v: f64 },
    /// `F(R) = exp(-R²/2B²) / (B²π)^{1/4}`; `B = 0` is the localised limit.
    Gaussian { b: f64 },
    /// Linear interpolation between samples, zero outside the table.
    Tabulated(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    r: Vec<f64>,
    f: Vec<Complex64>,
}

impl Table {
    pub fn new(mut samples: Vec<(f64, Complex64)>) -> Result<Self> {
        if samples.len() < 8 {
            return Err(Error::InvalidParams(format!(
                "tabulated weight needs at least 8 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|(r, f)| !r.is_finite() || !f.re.is_finite() || !f.im.is_finite()) {
            return Err(Error::InvalidParams("tabulated weight has non-finite values".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParams("tabulated R values must be distinct".into()));
        }
        let (r, f) = samples.into_iter().unzip();
        Ok(Self { r, f })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[Complex64] {
        &self.f
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], self.r[self.r.len() - 1])
    }

    pub fn is_real(&self) -> bool {
        self.f.iter().all(|z| z.im == 0.0)
    }

    fn interpolate(&self, x: f64) -> Result<Complex64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { r: x, lo, hi });
        }
        let k = self.r.partition_point(|&r| r <= x).clamp(1, self.r.len() - 1);
        let (x0, x1) = (self.r[k - 1], self.r[k]);
        let t = (x - x0) / (x1 - x0);
        Ok(self.f[k - 1] * (1.0 - t) + self.f[k] * t)
    }
}

impl WeightFunction {
    pub fn constant_box(v: f64) -> Result<Self> {
        let w = Self::ConstantBox { v };
        w.validate()?;
        Ok(w)
    }

    pub fn gaussian(b: f64) -> Result<Self> {
        let w = Self::Gaussian { b };
        w.validate()?;
        Ok(w)
    }

    pub fn tabulated(samples: Vec<(f64, Complex64)>) -> Result<Self> {
        Ok(Self::Tabulated(Table::new(samples)?))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ConstantBox { v } if !(v > 0.0) || !v.is_finite() => {
                Err(Error::InvalidParams(format!("box length V must be > 0, got {v}")))
            }
            Self::Gaussian { b } if !(b >= 0.0) || !b.is_finite() => {
                Err(Error::InvalidParams(format!("Gaussian width B must be >= 0, got {b}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Self::Tabulated(t) => t.is_real(),
            _ => true,
        }
    }

    /// Interval outside which `F` is zero (or negligible for the Gaussian).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::ConstantBox { v } => (-0.5 * v, 0.5 * v),
            Self::Gaussian { b } => (-10.0 * b, 10.0 * b),
            Self::Tabulated(t) => t.range(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<Complex64> {
        weight_eval(self, r)
    }

    /// Two-point weight `W(R', R) = F*(R') F(R)`.
    pub fn two_point(&self, r_prime: f64, r: f64) -> Result<Complex64> {
        Ok(self.eval(r_prime)?.conj() * self.eval(r)?)
    }
}

pub fn weight_eval(w: &WeightFunction, r: f64) -> Result<Complex64> {
    if !r.is_finite() {
        return Err(Error::InvalidParams(format!("R must be finite, got {r}")));
    }
    match w {
        WeightFunction::ConstantBox { v } => {
            Ok(Complex64::new(if r.abs() <= 0.5 * v { 1.0 } else { 0.0 }, 0.0))
        }
        WeightFunction::Gaussian { b } => {
            if *b == 0.0 {
                return Err(Error::InvalidParams(
                    "B = 0 weight is a point mass; it has no pointwise amplitude".into(),
                ));
            }
            let amp = (b * b * PI).powf(-0.25) * (-r * r / (2.0 * b * b)).exp();
            Ok(Complex64::new(amp, 0.0))
        }
        WeightFunction::Tabulated(t) => t.interpolate(r),
    }
}

/// Dimensionless delocalisation of the composite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveVolumes {
    /// `V/bs` for the box, `B/b` for the Gaussian.
    pub v_eff: f64,
    /// `B/bs`, Gaussian only.
    pub v_c_eff: Option<f64>,
}

impl EffectiveVolumes {
    pub fn of(params: &CompositeParams, w: &WeightFunction) -> Result<Self> {
        let d = params.derive()?;
        match *w {
            WeightFunction::ConstantBox { v } => Ok(Self {
                v_eff: v / params.bs()?,
                v_c_eff: None,
            }),
            WeightFunction::Gaussian { b: big_b } => {
                let v_eff = big_b / params.b;
                Ok(Self {
                    v_eff,
                    v_c_eff: d.bs.map(|_| v_eff * d.u2.sqrt()),
                })
            }
            WeightFunction::Tabulated(_) => Err(Error::InvalidParams(
                "effective volume is defined only for box and Gaussian weights".into(),
            )),
        }
    }
}

/// Box of effective volume `v_eff` in units of `bs`.
pub fn box_for_veff(params: &CompositeParams, v_eff: f64) -> Result<WeightFunction> {
    WeightFunction::constant_box(v_eff * params.bs()?)
}

/// Gaussian weight of effective volume `v_eff` in units of `b`.
pub fn gaussian_for_veff(params: &CompositeParams, v_eff: f64) -> Result<WeightFunction> {
    params.validate()?;
    WeightFunction::gaussian(v_eff * params.b)
}
