//! Monte Carlo checks of the free-probability relations behind the
//! estimator: the scalar generalized Marchenko-Pastur equation and the
//! S-transform relation for products of rectangular matrices.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::{build_cross, draw_noise, SandwichGenerator};
use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, sym_eigenvalues, Matrix};
use crate::model::{AutoModel, CrossModel, NoiseDist};
use crate::transforms::TransformContext;

type C64 = Complex64;

pub const MIN_DRAWS: usize = 10;

/// Resolvent test points must stay this far from every sample eigenvalue.
pub const MIN_TEST_DISTANCE: f64 = 0.05;

/// Real parts of the resolvent test points, in units of `Tr C / N`.
pub const MP_TEST_RE: [f64; 5] = [0.25, 0.75, 1.25, 1.75, 2.5];
/// Imaginary part of the resolvent test points, in the same units.
pub const MP_TEST_IM: f64 = 0.5;

/// Points at which the rectangular S-transform relation is checked.
pub const S_TEST_POINTS: [(f64, f64); 6] = [
    (-0.1, 0.0),
    (-0.05, 0.0),
    (0.02, 0.0),
    (0.05, 0.0),
    (0.1, 0.0),
    (0.05, 0.05),
];

/// Outcome of [`verify_mp_scalar`].
#[derive(Debug, Clone)]
pub struct MpScalarCheck {
    pub points: Vec<C64>,
    /// Draw-averaged `m_E(z)`.
    pub m_empirical: Vec<C64>,
    /// `m_C(Z)` with `Z = z chi_A(q m_E) / (q m_E)`.
    pub m_predicted: Vec<C64>,
    pub max_residual: f64,
}

/// Checks `m_E(z) = m_C(z chi_A(q m_E(z)) / (q m_E(z)))` on sandwich draws.
///
/// `C` is built once from `seed` and held fixed; draw `d` uses seed
/// `seed + 1 + d`. `m_X(z) = (1/N) Tr X (z - X)^{-1}`.
pub fn verify_mp_scalar(
    cross: &CrossModel,
    auto: &AutoModel,
    n: usize,
    t: usize,
    draws: usize,
    seed: u64,
) -> Result<MpScalarCheck> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_DRAWS} draws, got {draws}"
        )));
    }
    let c = build_cross(cross, n, seed)?;
    let c_spectrum = sym_eigenvalues(&c)?;
    let scale = c_spectrum.iter().sum::<f64>() / n as f64;
    let points: Vec<C64> = MP_TEST_RE
        .iter()
        .map(|&x| C64::new(x, MP_TEST_IM) * scale)
        .collect();

    let generator =
        SandwichGenerator::new(cross.clone(), auto.clone(), NoiseDist::Gaussian, n, t, t)?;
    let mut m_sum = vec![C64::new(0.0, 0.0); points.len()];
    for d in 0..draws {
        let sample = generator.sample_with_cross(c.clone(), seed.wrapping_add(1 + d as u64))?;
        let lambdas = sym_eigenvalues(&sample_covariance(&sample.y))?;
        for (z, acc) in points.iter().zip(m_sum.iter_mut()) {
            let distance = lambdas
                .iter()
                .map(|&l| (z - l).norm())
                .fold(f64::INFINITY, f64::min);
            if distance < MIN_TEST_DISTANCE {
                return Err(Error::TestPoint { z: *z, distance });
            }
            *acc += m_transform(&lambdas, *z);
        }
    }

    let q = n as f64 / t as f64;
    let ctx = TransformContext::new(auto.clone())?;
    let m_empirical: Vec<C64> = m_sum.iter().map(|m| m / draws as f64).collect();
    let mut m_predicted = Vec::with_capacity(points.len());
    for (z, m) in points.iter().zip(&m_empirical) {
        let u = m * q;
        let big_z = z * ctx.chi(u)? / u;
        m_predicted.push(m_transform(&c_spectrum, big_z));
    }
    let max_residual = m_empirical
        .iter()
        .zip(&m_predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(MpScalarCheck {
        points,
        m_empirical,
        m_predicted,
        max_residual,
    })
}

/// `(1/N) sum_k lambda_k / (z - lambda_k)`.
pub fn m_transform(spectrum: &[f64], z: C64) -> C64 {
    spectrum.iter().map(|&l| l / (z - l)).sum::<C64>() / spectrum.len() as f64
}

/// Outcome of [`verify_s_rect`].
#[derive(Debug, Clone)]
pub struct SRectReport {
    pub q: f64,
    /// Moments `m_1..m_4` of `WV`, `VW` and the Wishart matrix `W W^T`.
    pub wv_moments: [f64; 4],
    pub vw_moments: [f64; 4],
    pub wishart_moments: [f64; 4],
    /// Largest `|S_WV(z) - q(1+z)/(1+qz) S_VW(qz)|` over [`S_TEST_POINTS`].
    pub relation_residual: f64,
    /// Largest `|S_W(z) - 1/(1+qz)|` over [`S_TEST_POINTS`].
    pub wishart_residual: f64,
}

impl SRectReport {
    pub fn s_wv(&self, z: C64) -> C64 {
        s_from_moments(&self.wv_moments, z)
    }

    pub fn s_vw(&self, z: C64) -> C64 {
        s_from_moments(&self.vw_moments, z)
    }

    pub fn s_wishart(&self, z: C64) -> C64 {
        s_from_moments(&self.wishart_moments, z)
    }
}

/// Checks the S-transform relation between `WV` (`N x N`) and `VW`
/// (`T x T`) for `W = X / sqrt(T)` with Gaussian `X` and `V = D W^T`, `D` a
/// fixed diagonal with entries uniform on `[0.5, 1.5]`. The Wishart matrix
/// `W W^T` is checked against `S_W(z) = 1 / (1 + qz)` on the same draws.
///
/// Moments are averaged over draws; any moment whose relative standard error
/// exceeds 10% is reported as a sample-size error.
pub fn verify_s_rect(n: usize, t: usize, draws: usize, seed: u64) -> Result<SRectReport> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_DRAWS} draws, got {draws}"
        )));
    }
    if n == 0 || t == 0 {
        return Err(Error::InvalidParameter("need N, T >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag: Vec<f64> = (0..t).map(|_| rng.random_range(0.5..1.5)).collect();

    let mut wv = MomentAccumulator::default();
    let mut vw = MomentAccumulator::default();
    let mut wishart = MomentAccumulator::default();
    let norm = (t as f64).sqrt();
    for d in 0..draws {
        let w = draw_noise(&NoiseDist::Gaussian, n, t, seed.wrapping_add(1 + d as u64))? / norm;
        let mut wd = w.clone();
        for (j, &dj) in diag.iter().enumerate() {
            wd.column_mut(j).scale_mut(dj);
        }
        // WV = W D W^T
        wv.push(trace_moments(&(&wd * w.transpose()), n));
        // VW = D W^T W
        let mut vw_mat = w.transpose() * &w;
        for (i, &di) in diag.iter().enumerate() {
            vw_mat.row_mut(i).scale_mut(di);
        }
        vw.push(trace_moments(&vw_mat, t));
        wishart.push(trace_moments(&(&w * w.transpose()), n));
    }
    let wv_moments = wv.mean_checked()?;
    let vw_moments = vw.mean_checked()?;
    let wishart_moments = wishart.mean_checked()?;

    let q = n as f64 / t as f64;
    let one = C64::new(1.0, 0.0);
    let mut relation_residual: f64 = 0.0;
    let mut wishart_residual: f64 = 0.0;
    for &(re, im) in &S_TEST_POINTS {
        let z = C64::new(re, im);
        let lhs = s_from_moments(&wv_moments, z);
        let rhs = (one + z) * q / (one + z * q) * s_from_moments(&vw_moments, z * q);
        relation_residual = relation_residual.max((lhs - rhs).norm());
        let closed = (one + z * q).inv();
        wishart_residual =
            wishart_residual.max((s_from_moments(&wishart_moments, z) - closed).norm());
    }
    Ok(SRectReport {
        q,
        wv_moments,
        vw_moments,
        wishart_moments,
        relation_residual,
        wishart_residual,
    })
}

/// `(1/dim) Tr M^k` for `k = 1..4`, valid for non-symmetric `M`.
fn trace_moments(m: &Matrix, dim: usize) -> [f64; 4] {
    let m2 = m * m;
    // Tr(AB) = sum_ij A_ij B_ji
    let tr_prod = |a: &Matrix, b: &Matrix| a.component_mul(&b.transpose()).sum();
    let d = dim as f64;
    [
        m.trace() / d,
        m2.trace() / d,
        tr_prod(&m2, m) / d,
        tr_prod(&m2, &m2) / d,
    ]
}

/// S-transform truncated at order `z^3`, from the first four moments by
/// series reversion of `psi(z) = sum_k m_k z^k`.
pub fn s_from_moments(m: &[f64; 4], z: C64) -> C64 {
    let [m1, m2, m3, m4] = *m;
    let c1 = 1.0 / m1;
    let c2 = -m2 / m1.powi(3);
    let c3 = (2.0 * m2 * m2 - m1 * m3) / m1.powi(5);
    let c4 = (5.0 * m1 * m2 * m3 - m1 * m1 * m4 - 5.0 * m2.powi(3)) / m1.powi(7);
    // S = (1 + z)(c1 + c2 z + c3 z^2 + c4 z^3 + ..), expanded to z^3
    c1 + z * ((c1 + c2) + z * ((c2 + c3) + z * (c3 + c4)))
}

#[derive(Default)]
struct MomentAccumulator {
    samples: Vec<[f64; 4]>,
}

impl MomentAccumulator {
    fn push(&mut self, m: [f64; 4]) {
        self.samples.push(m);
    }

    fn mean_checked(&self) -> Result<[f64; 4]> {
        let count = self.samples.len() as f64;
        let mut mean = [0.0; 4];
        for k in 0..4 {
            let mu = self.samples.iter().map(|s| s[k]).sum::<f64>() / count;
            let var = self
                .samples
                .iter()
                .map(|s| (s[k] - mu).powi(2))
                .sum::<f64>()
                / (count - 1.0);
            let relative_error = (var / count).sqrt() / mu.abs();
            if relative_error.is_nan() || relative_error > 0.1 {
                return Err(Error::SampleSize {
                    order: k + 1,
                    relative_error,
                });
            }
            mean[k] = mu;
        }
        Ok(mean)
    }
}
