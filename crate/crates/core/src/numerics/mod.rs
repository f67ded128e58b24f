//! Shared numerical infrastructure: uniform grids, 1D quadrature, the
//! symmetric eigensolver contract, and exact multivariate Gaussian integrals.

mod eigen;
mod gaussian;
pub(crate) mod gaussian_internal {
    pub(crate) use super::gaussian::Quadratic2;
}
mod grid;
mod quadrature;

pub use eigen::{hermitian_eigenvalues, symmetric_eigenvalues, symmetric_eigs, SymmetricEigen};
pub use gaussian::GaussianForm;
pub use grid::Grid1D;
pub use quadrature::{
    gauss_hermite, gauss_legendre_panels, integrate_1d, integrate_1d_complex, Integral,
    QuadratureSpec, Scheme,
};
