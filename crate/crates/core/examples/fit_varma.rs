//! Fits VARMA(1,1) shrinkage parameters to the cross-validation oracle
//! without looking at the true covariance.

use covshrink::datagen::generate_sandwich;
use covshrink::fitting::{fit_shrinkage_params, step_grid, FitFamily};
use covshrink::linalg::{reconstruct, sym_eig};
use covshrink::metrics::frobenius_ratio;
use covshrink::oracle::oracle_cv;
use covshrink::shrinkage::shrink;
use covshrink::{AutoModel, CrossModel, CvConfig, NoiseDist, ShrinkInput};

fn main() -> covshrink::Result<()> {
    let (n, t) = (200, 400);
    let cv = CvConfig::new(10, 50, t);
    let truth = AutoModel::Varma {
        ar: vec![0.4],
        ma: vec![0.8, 0.5],
    };
    let sample = generate_sandwich(
        &CrossModel::InverseWishart { kappa: 2.0 },
        &truth,
        &NoiseDist::Gaussian,
        n,
        t,
        cv.required_width(),
        11,
    )?;
    let e = sample.sample_covariance();
    let eig = sym_eig(&e)?;
    let input = ShrinkInput::new(&eig.values, n, t)?;
    let oracle = oracle_cv(&sample.y, &cv, &eig.values)?;

    let family = FitFamily::VarmaGrid {
        ma: vec![vec![1.0], step_grid(0.0, 0.8, 0.2)],
        ar: vec![step_grid(0.0, 0.6, 0.2)],
    };
    let fit = fit_shrinkage_params(&input, &oracle.xi_raw, &family)?;
    println!("true model   {truth:?}");
    println!(
        "fitted       {:?} (objective {:.4e}, {} candidates)",
        fit.best, fit.objective, fit.evaluations
    );
    let xis = shrink(&input, &fit.best.method())?;
    let estimator = reconstruct(&eig.vectors, &xis)?;
    let ratio = frobenius_ratio(&estimator, &e, &sample.c_true)?.frobenius_ratio;
    println!("Frobenius ratio of the fitted estimator {ratio:.3}");
    Ok(())
}
