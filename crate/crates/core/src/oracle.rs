//! Oracle eigenvalues: the exact oracle (needs the true `C`), the
//! moving-window cross-validation oracle (data only) and its isotonic
//! regression.

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, sym_eig, Matrix, SymEig};

/// Time-ordered cross-validation layout.
///
/// Fold `mu` (0-based) trains on the `t_train` columns ending just before
/// column `t_train + mu * t_out` (0-based) and tests on the following `t_out`
/// columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvConfig {
    pub k_folds: usize,
    pub t_out: usize,
    pub t_train: usize,
}

impl CvConfig {
    pub const DEFAULT_K: usize = 10;
    pub const DEFAULT_T_OUT: usize = 50;

    pub fn new(k_folds: usize, t_out: usize, t_train: usize) -> Self {
        CvConfig {
            k_folds,
            t_out,
            t_train,
        }
    }

    /// Number of columns the layout consumes.
    pub fn required_width(&self) -> usize {
        self.t_train + self.k_folds * self.t_out
    }

    /// Largest `K` that fits in `t_total` columns.
    pub fn max_folds(t_total: usize, t_train: usize, t_out: usize) -> usize {
        t_total
            .saturating_sub(t_train)
            .checked_div(t_out)
            .unwrap_or(0)
    }

    pub fn validate(&self, t_total: usize) -> Result<()> {
        if self.k_folds == 0 || self.t_out == 0 || self.t_train == 0 {
            return Err(Error::Window(format!(
                "K, T_out and T must be positive (K={}, T_out={}, T={})",
                self.k_folds, self.t_out, self.t_train
            )));
        }
        if t_total < self.required_width() {
            return Err(Error::Window(format!(
                "{} columns available, T + K T_out = {} required",
                t_total,
                self.required_width()
            )));
        }
        Ok(())
    }

    /// 0-based start of the test window of fold `mu`.
    pub fn test_start(&self, mu: usize) -> usize {
        self.t_train + mu * self.t_out
    }
}

/// Cross-validation oracle paired with the full-window eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Fold-averaged quadratic forms by ascending train-eigenvalue rank.
    pub xi_raw: Vec<f64>,
    /// Isotonic regression of `xi_raw` on rank.
    pub xi_isotonic: Vec<f64>,
    /// Analysis-window sample eigenvalues, ascending.
    pub lambdas_ref: Vec<f64>,
}

/// `xi_i = v_i^T C v_i` for each sample eigenvector `v_i`.
pub fn oracle_exact(eig: &SymEig, c_true: &Matrix) -> Result<Vec<f64>> {
    let n = eig.dim();
    if c_true.nrows() != n || c_true.ncols() != n {
        return Err(Error::Dimension(format!(
            "C is {}x{}, eigenvectors have dimension {n}",
            c_true.nrows(),
            c_true.ncols()
        )));
    }
    let cv = c_true * &eig.vectors;
    Ok((0..n)
        .map(|i| eig.vectors.column(i).dot(&cv.column(i)))
        .collect())
}

/// Moving-window cross-validation oracle
/// `xi_i = (1/K) sum_mu <v_i^{train,mu}| E^{test,mu} |v_i^{train,mu}>`.
pub fn oracle_mwcv(y: &Matrix, cfg: &CvConfig) -> Result<Vec<f64>> {
    cfg.validate(y.ncols())?;
    let n = y.nrows();
    let mut acc = vec![0.0; n];
    for mu in 0..cfg.k_folds {
        let start = cfg.test_start(mu);
        let train = y.columns(start - cfg.t_train, cfg.t_train).into_owned();
        let test = y.columns(start, cfg.t_out);
        let eig = sym_eig(&sample_covariance(&train))?;
        // v^T (1/T_out) Y Y^T v = |Y^T v|^2 / T_out
        let proj = test.transpose() * &eig.vectors;
        for (i, slot) in acc.iter_mut().enumerate() {
            *slot += proj.column(i).norm_squared() / cfg.t_out as f64;
        }
    }
    let k = cfg.k_folds as f64;
    Ok(acc.into_iter().map(|s| s / k).collect())
}

/// Runs [`oracle_mwcv`] and the isotonic fit, pairing by rank with the
/// analysis-window eigenvalues `lambdas_ref`.
pub fn oracle_cv(y: &Matrix, cfg: &CvConfig, lambdas_ref: &[f64]) -> Result<OracleResult> {
    if lambdas_ref.len() != y.nrows() {
        return Err(Error::Dimension(format!(
            "{} reference eigenvalues for N = {}",
            lambdas_ref.len(),
            y.nrows()
        )));
    }
    let xi_raw = oracle_mwcv(y, cfg)?;
    let xi_isotonic = isotonic_fit(&xi_raw, lambdas_ref)?;
    Ok(OracleResult {
        xi_raw,
        xi_isotonic,
        lambdas_ref: lambdas_ref.to_vec(),
    })
}

/// Least-squares nondecreasing fit of `values` ordered by `lambdas`
/// (pool adjacent violators, equal weights).
pub fn isotonic_fit(values: &[f64], lambdas: &[f64]) -> Result<Vec<f64>> {
    if values.len() != lambdas.len() {
        return Err(Error::Dimension(format!(
            "{} values but {} abscissae",
            values.len(),
            lambdas.len()
        )));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("abscissae must be ascending".into()));
    }
    Ok(pava(values))
}

/// Pool adjacent violators on an already ordered sequence.
pub fn pava(values: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}
