use crate::error::{Error, Result};

/// Uniform grid `lo, lo + Δ, …, hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("grid needs n >= 2, got {n}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParams(format!("grid needs hi > lo, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, n })
    }

    /// Symmetric grid over `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// `n` cells of a periodic domain `[lo, lo + period)`; the point at
    /// `lo + period` is the image of `lo` and is not stored.
    pub fn periodic(lo: f64, period: f64, n: usize) -> Result<Self> {
        Self::new(lo, lo + period * (n as f64 - 1.0) / n as f64, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n as f64 - 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Same extent, twice the resolution (`2n - 1` points keeps every old node).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_uniform_and_hit_endpoints() {
        let g = Grid1D::new(-2.0, 3.0, 11).unwrap();
        let pts = g.points();
        assert_eq!(pts[0], -2.0);
        assert!((pts[10] - 3.0).abs() < 1e-15);
        for w in pts.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_grid_tiles_the_period() {
        let g = Grid1D::periodic(-5.0, 10.0, 8).unwrap();
        assert!((g.spacing() * 8.0 - 10.0).abs() < 1e-14);
        assert!((g.hi - (5.0 - 1.25)).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 1.0, 4).is_err());
        assert!(Grid1D::new(2.0, 1.0, 4).is_err());
    }

    #[test]
    fn refinement_keeps_old_nodes() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        let r = g.refined();
        for i in 0..g.n {
            assert!((g.point(i) - r.point(2 * i)).abs() < 1e-15);
        }
    }
}
