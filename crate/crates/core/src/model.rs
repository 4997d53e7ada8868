//! Data-generating models: population cross-covariance, sample
//! autocorrelation, and the entry distribution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Grid size used to turn a VARMA spectral density into autocorrelations.
pub const SPECTRAL_GRID: usize = 1 << 14;

/// Autocorrelation structure of the samples, `A_ts = a(|t - s|)`, `a(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum AutoModel {
    /// Independent samples, `A = I`.
    Identity,
    /// `a(k) = exp(-k / tau)`.
    ExpDecay { tau: f64 },
    /// Stationary VARMA process
    /// `y_t = sum_b ar[b-1] y_{t-b} + sum_a ma[a] eps_{t-a}`.
    Varma { ar: Vec<f64>, ma: Vec<f64> },
}

impl AutoModel {
    /// The VAR(1) process whose autocorrelation is `exp(-k / tau)`.
    pub fn var1_from_tau(tau: f64) -> AutoModel {
        let b = (-1.0 / tau).exp();
        AutoModel::Varma {
            ar: vec![b],
            ma: vec![(1.0 - b * b).sqrt()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AutoModel::Identity => Ok(()),
            AutoModel::ExpDecay { tau } => {
                if tau.is_finite() && *tau > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "exp-decay tau must be positive, got {tau}"
                    )))
                }
            }
            AutoModel::Varma { ar, ma } => {
                if ar.iter().chain(ma.iter()).any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("VARMA coefficients"));
                }
                if ma.iter().all(|&c| c == 0.0) {
                    return Err(Error::InvalidParameter(
                        "VARMA needs at least one nonzero moving-average coefficient".into(),
                    ));
                }
                check_stationary(ar)
            }
        }
    }

    /// `coth(1 / tau)` for the exponential-decay model.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            AutoModel::ExpDecay { tau } => Some(1.0 / (1.0 / tau).tanh()),
            _ => None,
        }
    }

    /// Unnormalized spectral density `H(omega)` of the process.
    ///
    /// Identity has the flat symbol 1, exp-decay uses its VAR(1) form.
    pub fn symbol(&self, omega: f64) -> f64 {
        match self {
            AutoModel::Identity => 1.0,
            AutoModel::ExpDecay { tau } => {
                let b = (-1.0 / tau).exp();
                (1.0 - b * b) / (1.0 - 2.0 * b * omega.cos() + b * b)
            }
            AutoModel::Varma { ar, ma } => varma_symbol(ar, ma, omega),
        }
    }

    /// Autocorrelations `a(0), ..., a(len - 1)` with `a(0) = 1`.
    pub fn autocorrelations(&self, len: usize) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self {
            AutoModel::Identity => (0..len).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect(),
            AutoModel::ExpDecay { tau } => (0..len).map(|k| (-(k as f64) / tau).exp()).collect(),
            AutoModel::Varma { ar, ma } => varma_autocorrelations(ar, ma, len),
        })
    }
}

/// `|sum_a ma[a] e^{-i a w}|^2 / |1 - sum_b ar[b-1] e^{-i b w}|^2`.
pub fn varma_symbol(ar: &[f64], ma: &[f64], omega: f64) -> f64 {
    let mut num = Complex64::new(0.0, 0.0);
    for (k, &c) in ma.iter().enumerate() {
        num += c * Complex64::from_polar(1.0, -(k as f64) * omega);
    }
    let mut den = Complex64::new(1.0, 0.0);
    for (k, &c) in ar.iter().enumerate() {
        den -= c * Complex64::from_polar(1.0, -((k + 1) as f64) * omega);
    }
    num.norm_sqr() / den.norm_sqr()
}

/// Autocorrelations from the spectral density by discrete Fourier summation
/// on a uniform grid, normalized so `a(0) = 1`.
fn varma_autocorrelations(ar: &[f64], ma: &[f64], len: usize) -> Vec<f64> {
    let grid = SPECTRAL_GRID.max((2 * len).next_power_of_two());
    let mut buf: Vec<Complex64> = (0..grid)
        .map(|j| Complex64::new(varma_symbol(ar, ma, 2.0 * PI * j as f64 / grid as f64), 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    let a0 = buf[0].re;
    buf.iter().take(len).map(|c| c.re / a0).collect()
}

/// Stationarity of `1 - sum_b ar[b-1] z^b` via the step-down recursion: all
/// reflection coefficients must lie strictly inside (-1, 1).
pub fn check_stationary(ar: &[f64]) -> Result<()> {
    let mut coeffs = ar.to_vec();
    while let Some(&k) = coeffs.last() {
        let order = coeffs.len();
        if k.abs() >= 1.0 {
            return Err(Error::NonStationary {
                order,
                reflection: k,
            });
        }
        let denom = 1.0 - k * k;
        coeffs = (0..order - 1)
            .map(|j| (coeffs[j] + k * coeffs[order - 2 - j]) / denom)
            .collect();
    }
    Ok(())
}

/// Population cross-covariance model.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossModel {
    /// Diagonal with `ceil(fraction_high * N)` entries at `high`, the rest at
    /// `low`.
    TwoPeak {
        low: f64,
        high: f64,
        fraction_high: f64,
    },
    /// `(1 - q) W^{-1}` with `W` a Wishart matrix of ratio `q = 1/(1 + 2 kappa)`.
    InverseWishart {
        kappa: f64,
    },
    Explicit(Matrix),
}

impl CrossModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            CrossModel::TwoPeak {
                low,
                high,
                fraction_high,
            } => {
                if !(low.is_finite() && high.is_finite() && *low > 0.0 && high >= low) {
                    return Err(Error::InvalidParameter(format!(
                        "two-peak needs 0 < low <= high, got low={low} high={high}"
                    )));
                }
                if !(0.0..=1.0).contains(fraction_high) {
                    return Err(Error::InvalidParameter(format!(
                        "fraction_high must lie in [0, 1], got {fraction_high}"
                    )));
                }
                Ok(())
            }
            CrossModel::InverseWishart { kappa } => {
                if kappa.is_finite() && *kappa > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "inverse-Wishart kappa must be positive, got {kappa}"
                    )))
                }
            }
            CrossModel::Explicit(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::Dimension("explicit C must be square".into()));
                }
                Ok(())
            }
        }
    }
}

/// Distribution of the i.i.d. entries of the innovation matrix `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseDist {
    Gaussian,
    /// Student-t with `nu > 2` degrees of freedom. When `standardized`, draws
    /// are scaled by `sqrt((nu - 2) / nu)` to unit variance; otherwise they
    /// keep the natural variance `nu / (nu - 2)`.
    StudentT {
        nu: f64,
        standardized: bool,
    },
}

impl NoiseDist {
    pub fn student_t(nu: f64) -> NoiseDist {
        NoiseDist::StudentT {
            nu,
            standardized: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseDist::Gaussian => Ok(()),
            NoiseDist::StudentT { nu, .. } => {
                if nu.is_finite() && *nu > 2.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "Student-t needs nu > 2, got {nu}"
                    )))
                }
            }
        }
    }

    /// Variance of a single entry.
    pub fn variance(&self) -> f64 {
        match self {
            NoiseDist::Gaussian => 1.0,
            NoiseDist::StudentT {
                standardized: true, ..
            } => 1.0,
            NoiseDist::StudentT {
                nu,
                standardized: false,
            } => nu / (nu - 2.0),
        }
    }
}
