//! Synthetic sandwich-model data `Y = sqrt(C) X sqrt(A)`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`. Stream 0 draws the innovation matrix `X` row by row
//! (entry `(i, t)` is draw number `i * T_total + t`); stream 1 draws the
//! Gaussian matrix behind an inverse-Wishart `C`, with attempt `k` re-seeded
//! from `seed + k`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::{AutoModel, CrossModel, NoiseDist};

const WISHART_ATTEMPTS: usize = 5;
const WISHART_SINGULAR_RATIO: f64 = 1e-12;
const TOEPLITZ_PSD_TOL: f64 = 1e-8;

/// One draw of the sandwich model.
#[derive(Debug, Clone)]
pub struct SandwichSample {
    /// `N x T_total` data; columns `0..t` are the analysis window and the
    /// rest feed cross-validation folds.
    pub y: Matrix,
    pub c_true: Matrix,
    pub auto: AutoModel,
    pub n: usize,
    pub t: usize,
    pub t_total: usize,
    pub seed: u64,
}

impl SandwichSample {
    /// The first `t` columns.
    pub fn analysis_window(&self) -> Matrix {
        self.y.columns(0, self.t).into_owned()
    }

    /// `E = (1/T) Y Y^T` over the analysis window.
    pub fn sample_covariance(&self) -> Matrix {
        linalg::sample_covariance(&self.analysis_window())
    }

    /// Population ratio `q = N / T`.
    pub fn q(&self) -> f64 {
        self.n as f64 / self.t as f64
    }
}

/// Population covariance for `model` at dimension `n`.
pub fn build_cross(model: &CrossModel, n: usize, seed: u64) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need N >= 2, got {n}")));
    }
    model.validate()?;
    match model {
        CrossModel::TwoPeak {
            low,
            high,
            fraction_high,
        } => {
            let n_high = ((fraction_high * n as f64) - 1e-9).ceil().max(0.0) as usize;
            let n_high = n_high.min(n);
            let diag = DVector::from_fn(n, |i, _| if i < n - n_high { *low } else { *high });
            Ok(Matrix::from_diagonal(&diag))
        }
        CrossModel::InverseWishart { kappa } => inverse_wishart(*kappa, n, seed),
        CrossModel::Explicit(m) => {
            if m.nrows() != n {
                return Err(Error::Dimension(format!(
                    "explicit C is {}x{}, expected N = {n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if linalg::max_asymmetry(m) >= linalg::SYMMETRY_TOL * linalg::max_abs(m).max(1.0) {
                return Err(Error::NotSymmetric(linalg::max_asymmetry(m)));
            }
            Ok(m.clone())
        }
    }
}

fn inverse_wishart(kappa: f64, n: usize, seed: u64) -> Result<Matrix> {
    let q_iw = 1.0 / (1.0 + 2.0 * kappa);
    // N / q_iw = N (1 + 2 kappa); the epsilon guards the floor against roundoff
    let t_iw = (n as f64 * (1.0 + 2.0 * kappa) + 1e-9).floor() as usize;
    for attempt in 0..WISHART_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        rng.set_stream(1);
        let r = gaussian_matrix(&mut rng, n, t_iw);
        let w = linalg::sample_covariance(&r);
        let eig = linalg::sym_eig(&w)?;
        let smallest = eig.values[0];
        let largest = eig.values[n - 1];
        if smallest < WISHART_SINGULAR_RATIO * largest {
            continue;
        }
        let inv: Vec<f64> = eig.values.iter().map(|v| (1.0 - q_iw) / v).collect();
        return linalg::reconstruct(&eig.vectors, &inv);
    }
    Err(Error::SingularWishart {
        attempts: WISHART_ATTEMPTS,
    })
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Matrix::from_row_slice(rows, cols, &data)
}

/// `T x T` Toeplitz autocorrelation matrix `A_ts = a(|t - s|)`.
pub fn build_auto_toeplitz(model: &AutoModel, t: usize) -> Result<Matrix> {
    if t == 0 {
        return Err(Error::InvalidParameter("need T >= 1".into()));
    }
    let lags = model.autocorrelations(t)?;
    let a = toeplitz(&lags);
    if !matches!(model, AutoModel::Identity) && t > 1 {
        let smallest = linalg::sym_eigenvalues(&a)?[0];
        if smallest < -TOEPLITZ_PSD_TOL {
            return Err(Error::NotPsd {
                value: smallest,
                largest: f64::NAN,
            });
        }
    }
    Ok(a)
}

/// Symmetric Toeplitz matrix from its first column.
pub fn toeplitz(lags: &[f64]) -> Matrix {
    let t = lags.len();
    Matrix::from_fn(t, t, |i, j| lags[i.abs_diff(j)])
}

/// Draws `N x T_total` i.i.d. entries from `noise`, row-major.
pub fn draw_noise(noise: &NoiseDist, n: usize, t_total: usize, seed: u64) -> Result<Matrix> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match *noise {
        NoiseDist::Gaussian => gaussian_matrix(&mut rng, n, t_total),
        NoiseDist::StudentT { nu, standardized } => {
            let dist = StudentT::new(nu)
                .map_err(|e| Error::InvalidParameter(format!("Student-t: {e}")))?;
            let scale = if standardized {
                ((nu - 2.0) / nu).sqrt()
            } else {
                1.0
            };
            let data: Vec<f64> = (0..n * t_total).map(|_| scale * rng.sample(dist)).collect();
            Matrix::from_row_slice(n, t_total, &data)
        }
    })
}

/// Filters each row of `x` through the stationary AR(1) recursion
/// `y_0 = x_0`, `y_t = g y_{t-1} + sqrt(1 - g^2) x_t` with `g = e^{-1/tau}`.
///
/// For white rows the output has row covariance `A_ts = e^{-|t-s|/tau}`, the
/// same law as `X sqrt(A)` for the exponential-decay model, at `O(N T)` cost
/// instead of a dense `T x T` root. Useful when `T` is in the tens of
/// thousands.
pub fn exp_decay_filter(x: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let g = (-1.0 / tau).exp();
    let scale = (1.0 - g * g).sqrt();
    let mut y = x.clone();
    for i in 0..y.nrows() {
        for t in 1..y.ncols() {
            y[(i, t)] = g * y[(i, t - 1)] + scale * x[(i, t)];
        }
    }
    Ok(y)
}

/// Sampler with the autocorrelation square root cached across draws.
#[derive(Debug, Clone)]
pub struct SandwichGenerator {
    cross: CrossModel,
    auto: AutoModel,
    noise: NoiseDist,
    n: usize,
    t: usize,
    t_total: usize,
    /// `None` when `A` is the identity.
    sqrt_a: Option<Matrix>,
}

impl SandwichGenerator {
    pub fn new(
        cross: CrossModel,
        auto: AutoModel,
        noise: NoiseDist,
        n: usize,
        t: usize,
        t_total: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need N >= 2, got {n}")));
        }
        if t == 0 || t_total < t {
            return Err(Error::InvalidParameter(format!(
                "need T_total >= T >= 1, got T = {t}, T_total = {t_total}"
            )));
        }
        cross.validate()?;
        noise.validate()?;
        let sqrt_a = match auto {
            AutoModel::Identity => {
                auto.validate()?;
                None
            }
            _ => Some(linalg::psd_sqrt(&build_auto_toeplitz(&auto, t_total)?)?),
        };
        Ok(SandwichGenerator {
            cross,
            auto,
            noise,
            n,
            t,
            t_total,
            sqrt_a,
        })
    }

    /// Builds `C` from `seed`, then draws `Y` with the same seed.
    pub fn sample(&self, seed: u64) -> Result<SandwichSample> {
        let c = build_cross(&self.cross, self.n, seed)?;
        self.sample_with_cross(c, seed)
    }

    /// Draws `Y` for a fixed population matrix.
    pub fn sample_with_cross(&self, c_true: Matrix, seed: u64) -> Result<SandwichSample> {
        if c_true.nrows() != self.n || c_true.ncols() != self.n {
            return Err(Error::Dimension(format!(
                "C is {}x{}, expected {}x{}",
                c_true.nrows(),
                c_true.ncols(),
                self.n,
                self.n
            )));
        }
        let x = draw_noise(&self.noise, self.n, self.t_total, seed)?;
        let xa = match &self.sqrt_a {
            Some(s) => x * s,
            None => x,
        };
        let diagonal = (0..self.n).all(|j| (0..self.n).all(|i| i == j || c_true[(i, j)] == 0.0));
        let y = if diagonal {
            let mut y = xa;
            for i in 0..self.n {
                let d = c_true[(i, i)];
                if d < 0.0 {
                    return Err(Error::NotPsd {
                        value: d,
                        largest: f64::NAN,
                    });
                }
                y.row_mut(i).scale_mut(d.sqrt());
            }
            y
        } else {
            linalg::psd_sqrt(&c_true)? * xa
        };
        Ok(SandwichSample {
            y,
            c_true,
            auto: self.auto.clone(),
            n: self.n,
            t: self.t,
            t_total: self.t_total,
            seed,
        })
    }
}

/// One-shot sandwich draw; see [`SandwichGenerator`] for repeated draws.
pub fn generate_sandwich(
    cross: &CrossModel,
    auto: &AutoModel,
    noise: &NoiseDist,
    n: usize,
    t: usize,
    t_total: usize,
    seed: u64,
) -> Result<SandwichSample> {
    SandwichGenerator::new(cross.clone(), auto.clone(), *noise, n, t, t_total)?.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_peak_layout() {
        let c = build_cross(
            &CrossModel::TwoPeak {
                low: 1.0,
                high: 3.0,
                fraction_high: 0.5,
            },
            4,
            0,
        )
        .unwrap();
        let expect = Matrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 3.0, 3.0]));
        assert_eq!(c, expect);

        let flat = build_cross(
            &CrossModel::TwoPeak {
                low: 1.0,
                high: 1.0,
                fraction_high: 0.3,
            },
            5,
            0,
        )
        .unwrap();
        assert_eq!(flat, Matrix::identity(5, 5));
    }

    #[test]
    fn two_peak_rounds_high_count_up() {
        let c = build_cross(
            &CrossModel::TwoPeak {
                low: 1.0,
                high: 2.0,
                fraction_high: 0.3,
            },
            5,
            0,
        )
        .unwrap();
        // ceil(1.5) = 2 high entries
        let highs = (0..5).filter(|&i| c[(i, i)] == 2.0).count();
        assert_eq!(highs, 2);
    }

    #[test]
    fn rejects_small_n() {
        assert!(build_cross(&CrossModel::InverseWishart { kappa: 1.0 }, 1, 0).is_err());
    }

    #[test]
    fn identity_toeplitz() {
        assert_eq!(
            build_auto_toeplitz(&AutoModel::Identity, 3).unwrap(),
            Matrix::identity(3, 3)
        );
    }

    #[test]
    fn exp_decay_lag_three() {
        let a = build_auto_toeplitz(&AutoModel::ExpDecay { tau: 3.0 }, 5).unwrap();
        assert!((a[(0, 3)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((a[(4, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(a[(i, i)], 1.0);
        }
    }

    #[test]
    fn nonstationary_varma_rejected() {
        let model = AutoModel::Varma {
            ar: vec![1.1],
            ma: vec![1.0],
        };
        assert!(matches!(
            build_auto_toeplitz(&model, 4),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn same_seed_same_data() {
        let cross = CrossModel::TwoPeak {
            low: 1.0,
            high: 3.0,
            fraction_high: 0.5,
        };
        let auto = AutoModel::ExpDecay { tau: 2.0 };
        let a =
            generate_sandwich(&cross, &auto, &NoiseDist::student_t(5.0), 6, 10, 14, 42).unwrap();
        let b =
            generate_sandwich(&cross, &auto, &NoiseDist::student_t(5.0), 6, 10, 14, 42).unwrap();
        assert_eq!(a.y, b.y);
        let c =
            generate_sandwich(&cross, &auto, &NoiseDist::student_t(5.0), 6, 10, 14, 43).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn window_sizes() {
        let s = generate_sandwich(
            &CrossModel::TwoPeak {
                low: 1.0,
                high: 1.0,
                fraction_high: 0.0,
            },
            &AutoModel::Identity,
            &NoiseDist::Gaussian,
            3,
            5,
            9,
            1,
        )
        .unwrap();
        assert_eq!(s.y.shape(), (3, 9));
        assert_eq!(s.analysis_window().shape(), (3, 5));
        assert_eq!(s.sample_covariance().shape(), (3, 3));
        assert!(SandwichGenerator::new(
            CrossModel::InverseWishart { kappa: 1.0 },
            AutoModel::Identity,
            NoiseDist::Gaussian,
            3,
            5,
            4
        )
        .is_err());
    }
}
