//! Loss metrics and the Marchenko-Pastur reference density.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq_distance, Matrix};

/// Squared Frobenius losses of an estimator and of the sample covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// `mse_estimator / mse_sample`.
    pub frobenius_ratio: f64,
    /// `Tr (Xi - C)^2`.
    pub mse_estimator: f64,
    /// `Tr (E - C)^2`.
    pub mse_sample: f64,
}

/// `Tr (X - C)^2`.
pub fn mse(x: &Matrix, c_true: &Matrix) -> Result<f64> {
    same_shape(x, c_true)?;
    Ok(frobenius_sq_distance(x, c_true))
}

/// Frobenius ratio `Tr (Xi - C)^2 / Tr (E - C)^2`; below one means `Xi`
/// improves on `E`.
pub fn frobenius_ratio(xi: &Matrix, e: &Matrix, c_true: &Matrix) -> Result<MetricReport> {
    same_shape(xi, c_true)?;
    same_shape(e, c_true)?;
    let mse_estimator = frobenius_sq_distance(xi, c_true);
    let mse_sample = frobenius_sq_distance(e, c_true);
    if mse_sample == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(MetricReport {
        frobenius_ratio: mse_estimator / mse_sample,
        mse_estimator,
        mse_sample,
    })
}

fn same_shape(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected matching square matrices, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Edges `(1 -+ sqrt q)^2` of the Marchenko-Pastur support.
pub fn mp_edges(q: f64) -> (f64, f64) {
    let r = q.sqrt();
    ((1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r))
}

/// Marchenko-Pastur density `sqrt((l+ - x)(x - l-)) / (2 pi q x)` of the
/// continuous part (the atom at zero for `q > 1` is not included).
pub fn mp_density(lambda: f64, q: f64) -> f64 {
    let (lo, hi) = mp_edges(q);
    if lambda <= lo || lambda >= hi || lambda <= 0.0 {
        return 0.0;
    }
    ((hi - lambda) * (lambda - lo)).sqrt() / (2.0 * PI * q * lambda)
}
