//! Epanechnikov-kernel estimates of the sample eigenvalue density and its
//! Hilbert transform, and the complex inputs `u_i` of the shrinkage formulas.
//!
//! Each sample eigenvalue `lambda_j` carries a kernel of width `b lambda_j`
//! with the global bandwidth `b = T^{-1/3}`. Estimates are evaluated at the
//! sample eigenvalues themselves, self-term included.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Eigenvalues below this fraction of the largest are raised to it before
/// kernel evaluation.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// `3/(4 sqrt 5) (1 - x^2/5)^+`: unit-variance Epanechnikov kernel.
pub fn epanechnikov_density(x: f64) -> f64 {
    let inner = 1.0 - x * x / 5.0;
    if inner > 0.0 {
        3.0 / (4.0 * SQRT5) * inner
    } else {
        0.0
    }
}

/// Hilbert transform of [`epanechnikov_density`].
///
/// The logarithmic term is taken as zero at `x = +-sqrt 5`.
pub fn epanechnikov_hilbert(x: f64) -> f64 {
    let linear = 3.0 * x / (10.0 * PI);
    let ratio = ((x - SQRT5) / (x + SQRT5)).abs();
    if ratio == 0.0 || !ratio.is_finite() {
        return linear;
    }
    linear - 3.0 / (4.0 * SQRT5 * PI) * (1.0 - x * x / 5.0) * ratio.ln()
}

/// Kernel estimate of the sample spectrum at each sample eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    /// Sample eigenvalues, ascending, after flooring.
    pub lambdas: Vec<f64>,
    /// Density `rho_E(lambda_i)`.
    pub rho: Vec<f64>,
    /// Hilbert transform `h_E(lambda_i)`.
    pub hilb: Vec<f64>,
    pub bandwidth: f64,
}

impl SpectralEstimate {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Kernel density at an arbitrary point.
    pub fn density_at(&self, x: f64) -> f64 {
        kernel_sum(&self.lambdas, self.bandwidth, x, epanechnikov_density)
    }

    /// Kernel Hilbert transform at an arbitrary point.
    pub fn hilbert_at(&self, x: f64) -> f64 {
        kernel_sum(&self.lambdas, self.bandwidth, x, epanechnikov_hilbert)
    }

    /// Interval outside of which the density estimate vanishes.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.lambdas[0] * (1.0 - SQRT5 * self.bandwidth);
        let hi = self.lambdas[self.len() - 1] * (1.0 + SQRT5 * self.bandwidth);
        (lo, hi)
    }
}

fn kernel_sum(centers: &[f64], bandwidth: f64, x: f64, kernel: fn(f64) -> f64) -> f64 {
    let n = centers.len() as f64;
    centers
        .iter()
        .map(|&c| {
            let scale = bandwidth * c;
            kernel((x - c) / scale) / scale
        })
        .sum::<f64>()
        / n
}

/// Global bandwidth `T^{-1/3}`.
pub fn bandwidth(t: usize) -> f64 {
    (t as f64).powf(-1.0 / 3.0)
}

/// Kernel estimates of `rho_E` and `h_E` at each sample eigenvalue.
pub fn estimate_spectrum(lambdas: &[f64], t: usize) -> Result<SpectralEstimate> {
    if lambdas.is_empty() {
        return Err(Error::Domain("no eigenvalues".into()));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("need T >= 1".into()));
    }
    if lambdas.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("eigenvalues must be ascending".into()));
    }
    let largest = lambdas[lambdas.len() - 1];
    if largest <= 0.0 {
        return Err(Error::Domain(format!(
            "largest eigenvalue {largest} is not positive"
        )));
    }
    let floor = EIGENVALUE_FLOOR * largest;
    let lambdas: Vec<f64> = lambdas.iter().map(|&l| l.max(floor)).collect();
    let bw = bandwidth(t);
    let rho = lambdas
        .iter()
        .map(|&x| kernel_sum(&lambdas, bw, x, epanechnikov_density))
        .collect();
    let hilb = lambdas
        .iter()
        .map(|&x| kernel_sum(&lambdas, bw, x, epanechnikov_hilbert))
        .collect();
    Ok(SpectralEstimate {
        lambdas,
        rho,
        hilb,
        bandwidth: bw,
    })
}

/// `u_i = alpha_i + i beta_i` with `alpha_i = q (pi lambda_i h_E - 1)` and
/// `beta_i = q pi lambda_i rho_E`, i.e. `q m_E(lambda_i - i0+)`.
pub fn compute_u(spec: &SpectralEstimate, q: f64) -> Vec<Complex64> {
    spec.lambdas
        .iter()
        .zip(spec.rho.iter().zip(&spec.hilb))
        .map(|(&l, (&rho, &h))| {
            let alpha = q * (PI * l * h - 1.0);
            let beta = (q * PI * l * rho).max(0.0);
            Complex64::new(alpha, beta)
        })
        .collect()
}
