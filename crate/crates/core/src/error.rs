use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max |m_ij - m_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive semi-definite (eigenvalue {value:e}, largest {largest:e})")]
    NotPsd { value: f64, largest: f64 },

    #[error("{solver} failed to converge")]
    NoConvergence { solver: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("autoregressive polynomial is not stationary (reflection coefficient {reflection} at order {order})")]
    NonStationary { order: usize, reflection: f64 },

    #[error("Wishart draw stayed singular after {attempts} attempts")]
    SingularWishart { attempts: usize },

    #[error("spectral domain error: {0}")]
    Domain(String),

    #[error("psi-transform evaluated too close to a pole at z = {z}")]
    Pole { z: Complex64 },

    #[error("chi-transform inversion failed at u = {u} (last residual {residual:e})")]
    Inversion { u: Complex64, residual: f64 },

    #[error("effective sample size {t_eff} is degenerate for N = {n}")]
    DegenerateSampleSize { t_eff: f64, n: usize },

    #[error("cross-validation windows do not fit: {0}")]
    Window(String),

    #[error("every grid point of the {family} fit failed")]
    FitFailed { family: &'static str },

    #[error("degenerate Frobenius denominator: Tr(E - C)^2 = 0")]
    DegenerateDenominator,

    #[error("test point {z} lies within {distance:e} of the sample spectrum")]
    TestPoint { z: Complex64, distance: f64 },

    #[error("moment {order} is too noisy (relative standard error {relative_error:.3})")]
    SampleSize { order: usize, relative_error: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from reading or validating user input rather
    /// than from the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
