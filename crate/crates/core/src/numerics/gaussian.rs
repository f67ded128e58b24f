use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `exp(-½ xᵀA x + jᵀx + c)` over `x ∈ ℝⁿ` with complex-symmetric `A`.
///
/// Marginalising a block with positive-definite real part is exact
/// (Schur complement), which is how every closed-form kernel in this crate
/// is produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianForm {
    pub a: DMatrix<Complex64>,
    pub j: DVector<Complex64>,
    pub c: Complex64,
}

impl GaussianForm {
    pub fn new(n: usize) -> Self {
        Self {
            a: DMatrix::zeros(n, n),
            j: DVector::zeros(n),
            c: Complex64::new(0.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    /// Adds `-w (vᵀx)²` to the exponent.
    pub fn add_square(&mut self, v: &[Complex64], w: f64) -> &mut Self {
        assert_eq!(v.len(), self.dim());
        for r in 0..v.len() {
            for s in 0..v.len() {
                self.a[(r, s)] += v[r] * v[s] * (2.0 * w);
            }
        }
        self
    }

    /// Adds `-w (x_i - x_k)²`.
    pub fn add_diff_square(&mut self, i: usize, k: usize, w: f64) -> &mut Self {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[i] += 1.0;
        v[k] -= 1.0;
        self.add_square(&v, w)
    }

    /// Adds `-w x_i²`.
    pub fn add_var_square(&mut self, i: usize, w: f64) -> &mut Self {
        self.a[(i, i)] += Complex64::new(2.0 * w, 0.0);
        self
    }

    pub fn add_log_prefactor(&mut self, c: f64) -> &mut Self {
        self.c += c;
        self
    }

    /// Integrates the listed variables over ℝ, keeping the rest in order.
    pub fn integrate_out(&self, idx: &[usize]) -> Result<GaussianForm> {
        let n = self.dim();
        let keep: Vec<usize> = (0..n).filter(|k| !idx.contains(k)).collect();
        let m = idx.len();
        let aii = DMatrix::from_fn(m, m, |r, s| self.a[(idx[r], idx[s])]);
        if (0..m).any(|r| !(aii[(r, r)].re > 0.0)) {
            return Err(Error::InvalidParams(
                "Gaussian integral over a non-decaying direction".into(),
            ));
        }
        let lu = aii.clone().lu();
        let det = lu.determinant();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("singular Gaussian block".into()))?;
        let aki = DMatrix::from_fn(keep.len(), m, |r, s| self.a[(keep[r], idx[s])]);
        let akk = DMatrix::from_fn(keep.len(), keep.len(), |r, s| self.a[(keep[r], keep[s])]);
        let ji = DVector::from_fn(m, |r, _| self.j[idx[r]]);
        let jk = DVector::from_fn(keep.len(), |r, _| self.j[keep[r]]);

        let aki_inv = &aki * &inv;
        let a = akk - &aki_inv * aki.transpose();
        let j = jk - &aki_inv * &ji;
        let quad = (ji.transpose() * &inv * &ji)[(0, 0)];
        let c = self.c + 0.5 * m as f64 * (2.0 * PI).ln() - 0.5 * det.ln() + 0.5 * quad;
        Ok(GaussianForm { a, j, c })
    }

    /// Substitutes `x = M y`.
    pub fn pullback(&self, m: &DMatrix<f64>) -> GaussianForm {
        let mc = m.map(|x| Complex64::new(x, 0.0));
        GaussianForm {
            a: mc.transpose() * &self.a * &mc,
            j: mc.transpose() * &self.j,
            c: self.c,
        }
    }

    pub fn integral(&self) -> Result<Complex64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        Ok(self.integrate_out(&all)?.c.exp())
    }

    pub fn log_eval(&self, x: &[f64]) -> Complex64 {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut e = self.c;
        for r in 0..n {
            e += self.j[r] * x[r];
            let row: Complex64 = x.iter().enumerate().map(|(s, xs)| self.a[(r, s)] * xs).sum();
            e -= 0.5 * row * x[r];
        }
        e
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.log_eval(x).exp()
    }
}

/// Two-variable form flattened for fast repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Quadratic2 {
    a00: Complex64,
    a01: Complex64,
    a11: Complex64,
    j0: Complex64,
    j1: Complex64,
    c: Complex64,
}

impl Quadratic2 {
    pub(crate) fn from_form(f: &GaussianForm) -> Self {
        assert_eq!(f.dim(), 2);
        Self {
            a00: f.a[(0, 0)],
            a01: f.a[(0, 1)] + f.a[(1, 0)],
            a11: f.a[(1, 1)],
            j0: f.j[0],
            j1: f.j[1],
            c: f.c,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> Complex64 {
        (self.c + self.j0 * x + self.j1 * y
            - 0.5 * (self.a00 * x * x + self.a01 * x * y + self.a11 * y * y))
            .exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_integral() {
        let mut f = GaussianForm::new(1);
        f.add_var_square(0, 2.0);
        // ∫ e^{-2x²} = √(π/2)
        assert!((f.integral().unwrap().re - (PI / 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fourier_transform_of_gaussian() {
        // ∫ e^{-x²} e^{-ikx} dx = √π e^{-k²/4}, with k carried as a variable
        let k = 0.7;
        let mut f = GaussianForm::new(2);
        f.add_var_square(0, 1.0);
        // cross term −i k x appears as A_{01} = A_{10} = i
        f.a[(0, 1)] += Complex64::i();
        f.a[(1, 0)] += Complex64::i();
        let g = f.integrate_out(&[0]).unwrap();
        let v = g.eval(&[k]);
        assert!((v.re - PI.sqrt() * (-k * k / 4.0).exp()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn marginal_then_total_equals_total() {
        let mut f = GaussianForm::new(3);
        f.add_var_square(0, 0.5).add_diff_square(0, 1, 0.3).add_diff_square(1, 2, 0.8);
        f.add_var_square(2, 0.1);
        f.j[1] = Complex64::new(0.2, 0.0);
        let total = f.integral().unwrap();
        let staged = f.integrate_out(&[1]).unwrap().integral().unwrap();
        assert!((total - staged).norm() < 1e-12 * total.norm());
    }

    #[test]
    fn pullback_onto_diagonal() {
        // ∫ e^{-(x²+y²)/2} restricted to y = x is ∫ e^{-x²} = √π
        let mut f = GaussianForm::new(2);
        f.add_var_square(0, 0.5).add_var_square(1, 0.5);
        let diag = f.pullback(&DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
        assert!((diag.integral().unwrap().re - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn flattened_matches_general() {
        let mut f = GaussianForm::new(2);
        f.add_var_square(0, 0.4).add_diff_square(0, 1, 0.25).add_log_prefactor(0.3);
        f.j[0] = Complex64::new(0.1, 0.2);
        let q = Quadratic2::from_form(&f);
        let (x, y) = (0.3, -1.1);
        assert!((q.eval(x, y) - f.eval(&[x, y])).norm() < 1e-14);
    }

    #[test]
    fn rejects_growing_direction() {
        let mut f = GaussianForm::new(1);
        f.add_var_square(0, -1.0);
        assert!(f.integral().is_err());
    }
}
