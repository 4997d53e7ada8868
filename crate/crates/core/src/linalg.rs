//! Dense real-matrix primitives: symmetric eigendecomposition, PSD square
//! roots and spectral reconstruction.
//!
//! Matrices are `nalgebra` dense matrices; the symmetric eigensolver is
//! delegated to `faer`. Eigenvalues are always returned in ascending order
//! and every downstream index convention (rank pairing, CSV output) relies
//! on that.

use faer::Side;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix.
pub type Matrix = DMatrix<f64>;

/// Symmetric inputs may deviate from exact symmetry by this much (absolute,
/// scaled by the largest entry when that exceeds one).
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Relative tolerance for tiny negative eigenvalues in [`psd_sqrt`].
pub const PSD_CLIP_TOL: f64 = 1e-10;

/// Eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` paired with `values[i]`.
    pub vectors: Matrix,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds `sum_i values[i] v_i v_i^T`.
    pub fn reconstruct(&self) -> Matrix {
        // dimensions agree by construction
        reconstruct(&self.vectors, &self.values).expect("consistent eigendecomposition")
    }
}

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest `|m_ij - m_ji|`.
pub fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let asym = max_asymmetry(m);
    if asym >= SYMMETRY_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Symmetric part of `m` as a faer matrix.
fn to_faer_symmetric(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eig(m: &Matrix) -> Result<SymEig> {
    check_symmetric(m)?;
    let n = m.nrows();
    let evd = to_faer_symmetric(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence {
            solver: "self-adjoint eigensolver",
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep the solver's column order
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));

    let values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            solver: "self-adjoint eigensolver",
        });
    }
    Ok(SymEig { values, vectors })
}

/// Eigenvalues only, ascending. Cheaper than [`sym_eig`] for large inputs.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let mut values = to_faer_symmetric(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence {
            solver: "self-adjoint eigensolver",
        })?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `sum_i values[i] v_i v_i^T` for the columns `v_i` of `vectors`.
///
/// The result is symmetrized so it is exactly symmetric.
pub fn reconstruct(vectors: &Matrix, values: &[f64]) -> Result<Matrix> {
    if vectors.ncols() != values.len() {
        return Err(Error::Dimension(format!(
            "{} eigenvector columns but {} values",
            vectors.ncols(),
            values.len()
        )));
    }
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let mut out = scaled * vectors.transpose();
    symmetrize(&mut out);
    Ok(out)
}

/// Replaces `m` with `(m + m^T) / 2`.
pub fn symmetrize(m: &mut Matrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Symmetric square root of a positive semi-definite matrix.
///
/// Eigenvalues in `[-1e-10 * max, 0)` are treated as roundoff and clipped to
/// zero; anything more negative is rejected.
pub fn psd_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = sym_eig(m)?;
    let largest = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let roots = eig
        .values
        .iter()
        .map(|&v| {
            if v < -PSD_CLIP_TOL * largest || (largest == 0.0 && v < 0.0) {
                Err(Error::NotPsd { value: v, largest })
            } else {
                Ok(v.max(0.0).sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    reconstruct(&eig.vectors, &roots)
}

/// Sample covariance `(1/T) Y Y^T` of the columns of `y`.
pub fn sample_covariance(y: &Matrix) -> Matrix {
    let t = y.ncols() as f64;
    let mut e = (y * y.transpose()) / t;
    symmetrize(&mut e);
    e
}

/// `Tr((a - b)^2)` for symmetric `a`, `b`: the squared Frobenius distance.
pub fn frobenius_sq_distance(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
