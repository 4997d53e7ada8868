//! Rotationally invariant shrinkage: each sample eigenvalue `lambda_i` is
//! replaced by `xi_i` while the sample eigenvectors are kept.
//!
//! The autocorrelation-aware estimator is
//!
//! ```text
//! xi_i = lambda_i Im chi_A(u_i) / Im u_i
//! ```
//!
//! with `u_i` from [`crate::kde::compute_u`]. For `A = I` this reduces to the
//! Ledoit-Peche formula `xi_i = lambda_i / |1 + u_i|^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kde::{compute_u, estimate_spectrum, SpectralEstimate};
use crate::linalg::{reconstruct, Matrix, SymEig};
use crate::model::AutoModel;
use crate::transforms::{TransformContext, TransformSettings};

/// Below this `Im u` the ratio `Im chi / Im u` is taken at `Re u + i IM_OFFSET`.
pub const IM_FLOOR: f64 = 1e-14;
pub const IM_OFFSET: f64 = 1e-8;

/// Smallest admissible `T_eff / N` for the effective-sample-size estimator.
pub const MIN_EFFECTIVE_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum ShrinkMethod {
    /// Full estimator using the given autocorrelation model.
    Correlated(AutoModel),
    /// Ledoit-Peche, i.e. the correlated estimator with `A = I`.
    LedoitPeche,
    /// Ledoit-Peche with `T` replaced by `T (1 - e^{-1/tau_eff})`.
    EffectiveLp { tau_eff: f64 },
    /// `xi = alpha lambda + (1 - alpha)`.
    Linear { alpha: f64 },
}

/// Cleaned spectrum and the estimator it defines.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageResult {
    /// Sample eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    /// Shrunk eigenvalues, paired with `lambdas` by index.
    pub xis: Vec<f64>,
    pub method: ShrinkMethod,
    /// `Xi = sum_i xi_i v_i v_i^T` in the sample eigenbasis.
    pub xi_matrix: Matrix,
}

/// Shared inputs: sample eigenvalues with their kernel estimate and `q = N/T`.
#[derive(Debug, Clone)]
pub struct ShrinkInput {
    pub spectrum: SpectralEstimate,
    pub u: Vec<Complex64>,
    pub n: usize,
    pub t: usize,
}

impl ShrinkInput {
    /// `lambdas` must be ascending (as returned by [`crate::linalg::sym_eig`]).
    pub fn new(lambdas: &[f64], n: usize, t: usize) -> Result<Self> {
        if lambdas.len() != n {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for N = {n}",
                lambdas.len()
            )));
        }
        let spectrum = estimate_spectrum(lambdas, t)?;
        let u = compute_u(&spectrum, n as f64 / t as f64);
        Ok(ShrinkInput { spectrum, u, n, t })
    }

    pub fn q(&self) -> f64 {
        self.n as f64 / self.t as f64
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.spectrum.lambdas
    }
}

/// Shrunk eigenvalues for `method`, paired with `input.lambdas()`.
pub fn shrink(input: &ShrinkInput, method: &ShrinkMethod) -> Result<Vec<f64>> {
    shrink_with_settings(input, method, &TransformSettings::default())
}

/// As [`shrink`], with explicit numerical settings for the transforms.
pub fn shrink_with_settings(
    input: &ShrinkInput,
    method: &ShrinkMethod,
    settings: &TransformSettings,
) -> Result<Vec<f64>> {
    Ok(match method {
        ShrinkMethod::Correlated(model) => shrink_correlated(
            input,
            &TransformContext::with_settings(model.clone(), settings)?,
        )?,
        ShrinkMethod::LedoitPeche => shrink_lp(input),
        ShrinkMethod::EffectiveLp { tau_eff } => shrink_lp_effective(input, *tau_eff)?,
        ShrinkMethod::Linear { alpha } => shrink_linear(input.lambdas(), *alpha)?,
    })
}

/// `xi_i = lambda_i Im chi_A(u_i) / Im u_i`, clipped at zero.
///
/// Eigenvalues are visited in ascending order and each inversion starts from
/// the previous root, which keeps Newton iterations short for VARMA models.
pub fn shrink_correlated(input: &ShrinkInput, ctx: &TransformContext) -> Result<Vec<f64>> {
    let mut xis = Vec::with_capacity(input.n);
    let mut seed: Option<Complex64> = None;
    for (&lambda, &u) in input.lambdas().iter().zip(&input.u) {
        let u = if u.im < IM_FLOOR {
            Complex64::new(u.re, IM_OFFSET)
        } else {
            u
        };
        let chi = match seed {
            Some(s) => ctx.chi_seeded(u, s)?,
            None => ctx.chi(u)?,
        };
        seed = Some(chi);
        let xi = lambda * chi.im / u.im;
        if !xi.is_finite() {
            return Err(Error::NonFinite("shrunk eigenvalue"));
        }
        xis.push(xi.max(0.0));
    }
    Ok(xis)
}

/// Ledoit-Peche: `xi_i = lambda_i / |1 + u_i|^2`.
pub fn shrink_lp(input: &ShrinkInput) -> Vec<f64> {
    lp_with_scale(input, 1.0)
}

/// Effective sample size `T (1 - e^{-1/tau})`.
pub fn effective_sample_size(t: usize, tau_eff: f64) -> f64 {
    t as f64 * (1.0 - (-1.0 / tau_eff).exp())
}

/// Ledoit-Peche at the reduced sample size `T_eff`, where `u` is rescaled by
/// `q_eff / q = T / T_eff`.
pub fn shrink_lp_effective(input: &ShrinkInput, tau_eff: f64) -> Result<Vec<f64>> {
    if !(tau_eff.is_finite() && tau_eff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau_eff must be positive, got {tau_eff}"
        )));
    }
    let t_eff = effective_sample_size(input.t, tau_eff);
    if t_eff < MIN_EFFECTIVE_RATIO * input.n as f64 {
        return Err(Error::DegenerateSampleSize { t_eff, n: input.n });
    }
    Ok(lp_with_scale(input, input.t as f64 / t_eff))
}

fn lp_with_scale(input: &ShrinkInput, scale: f64) -> Vec<f64> {
    input
        .lambdas()
        .iter()
        .zip(&input.u)
        .map(|(&lambda, &u)| lambda / (Complex64::new(1.0, 0.0) + u * scale).norm_sqr())
        .collect()
}

/// Linear shrinkage towards the identity: `xi = alpha lambda + 1 - alpha`.
pub fn shrink_linear(lambdas: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "linear shrinkage intensity must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(lambdas.iter().map(|&l| alpha * l + (1.0 - alpha)).collect())
}

/// Rebuilds `Xi = sum_i xi_i v_i v_i^T` over the sample eigenvectors.
pub fn build_estimator(eig: &SymEig, xis: &[f64], method: ShrinkMethod) -> Result<ShrinkageResult> {
    let xi_matrix = reconstruct(&eig.vectors, xis)?;
    Ok(ShrinkageResult {
        lambdas: eig.values.clone(),
        xis: xis.to_vec(),
        method,
        xi_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(lambdas: &[f64], t: usize) -> ShrinkInput {
        ShrinkInput::new(lambdas, lambdas.len(), t).unwrap()
    }

    #[test]
    fn correlated_with_identity_is_ledoit_peche() {
        let lambdas: Vec<f64> = (0..40).map(|i| 0.3 + 0.05 * i as f64).collect();
        let inp = input(&lambdas, 100);
        let lp = shrink_lp(&inp);
        let ctx = TransformContext::new(AutoModel::Identity).unwrap();
        let corr = shrink_correlated(&inp, &ctx).unwrap();
        for (a, b) in lp.iter().zip(&corr) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn effective_lp_with_tiny_tau_is_lp() {
        let lambdas: Vec<f64> = (0..20).map(|i| 0.5 + 0.1 * i as f64).collect();
        let inp = input(&lambdas, 80);
        let lp = shrink_lp(&inp);
        let eff = shrink_lp_effective(&inp, 1e-3).unwrap();
        for (a, b) in lp.iter().zip(&eff) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((effective_sample_size(1000, 1e-3) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn effective_lp_degenerate() {
        let inp = input(&[1.0, 2.0], 3);
        assert!(matches!(
            shrink_lp_effective(&inp, 1e6),
            Err(Error::DegenerateSampleSize { .. })
        ));
        assert!(shrink_lp_effective(&inp, -1.0).is_err());
    }

    #[test]
    fn linear_endpoints() {
        let l = [0.5, 1.0, 3.0];
        assert_eq!(shrink_linear(&l, 1.0).unwrap(), l.to_vec());
        assert_eq!(shrink_linear(&l, 0.0).unwrap(), vec![1.0; 3]);
        assert!(shrink_linear(&l, 1.5).is_err());
    }

    #[test]
    fn vanishing_q_returns_sample_eigenvalues() {
        // T enormous: u -> 0 and every estimator is the identity map
        let lambdas = [0.5, 1.0, 2.0];
        let inp = ShrinkInput::new(&lambdas, 3, 1_000_000_000).unwrap();
        let ctx = TransformContext::new(AutoModel::ExpDecay { tau: 2.0 }).unwrap();
        for xi in [shrink_lp(&inp), shrink_correlated(&inp, &ctx).unwrap()] {
            for (x, l) in xi.iter().zip(&lambdas) {
                assert!((x - l).abs() < 1e-6 * l);
            }
        }
    }

    #[test]
    fn estimator_rebuild() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let eig = crate::linalg::sym_eig(&m).unwrap();
        let ones = build_estimator(&eig, &[1.0, 1.0], ShrinkMethod::Linear { alpha: 0.0 }).unwrap();
        assert!((ones.xi_matrix - Matrix::identity(2, 2)).norm() < 1e-12);
        let same = build_estimator(&eig, &eig.values, ShrinkMethod::Linear { alpha: 1.0 }).unwrap();
        assert!((same.xi_matrix - m).norm() < 1e-12);
        assert!(build_estimator(&eig, &[1.0], ShrinkMethod::LedoitPeche).is_err());
    }
}
