use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("R = {r} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("quadrature not converged after {refinements} refinements (last change {change:.3e}, tolerance {tol:.3e})")]
    QuadratureNotConverged {
        refinements: usize,
        change: f64,
        tol: f64,
    },

    #[error("grid too coarse: trace changed by {change:.3e} (relative) when N doubled from {n}")]
    GridTooCoarse { n: usize, change: f64 },

    #[error("matrix not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("non-positive purity Tr[rho^2] = {0:.3e}")]
    NonPositivePurity(f64),

    #[error("spectrum error: eigenvalue {0:.3e} below -1e-6")]
    SpectrumError(f64),

    #[error("negative Wigner value {value:.3e} at (q, p) = ({q}, {p}); Wigner-Shannon entropy undefined")]
    NegativeWigner { value: f64, q: f64, p: f64 },

    #[error("negative Husimi value {value:.3e} at (q, p) = ({q}, {p})")]
    NegativeHusimi { value: f64, q: f64, p: f64 },

    #[error("closed form outside its validity range: {0}")]
    OutOfValidity(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::GridTooCoarse { .. }
                | Error::NotSymmetric(_)
                | Error::NoConvergence(_)
                | Error::NonPositivePurity(_)
                | Error::SpectrumError(_)
                | Error::NegativeWigner { .. }
                | Error::NegativeHusimi { .. }
        )
    }
}
