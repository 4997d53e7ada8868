//! Moving-window cross-validation oracle and its isotonic fit, next to the
//! exact oracle that uses the true covariance.

use covshrink::datagen::generate_sandwich;
use covshrink::linalg::sym_eig;
use covshrink::oracle::{oracle_cv, oracle_exact};
use covshrink::{AutoModel, CrossModel, CvConfig, NoiseDist};

fn main() -> covshrink::Result<()> {
    let (n, t) = (200, 400);
    let cv = CvConfig::new(10, 50, t);
    let cross = CrossModel::TwoPeak {
        low: 1.0,
        high: 3.0,
        fraction_high: 0.5,
    };
    let sample = generate_sandwich(
        &cross,
        &AutoModel::ExpDecay { tau: 3.0 },
        &NoiseDist::Gaussian,
        n,
        t,
        cv.required_width(),
        3,
    )?;
    let eig = sym_eig(&sample.sample_covariance())?;
    let exact = oracle_exact(&eig, &sample.c_true)?;
    let oracle = oracle_cv(&sample.y, &cv, &eig.values)?;

    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9}",
        "rank", "lambda", "exact", "cv", "isotonic"
    );
    for i in (0..n).step_by(20).chain([n - 1]) {
        println!(
            "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            i + 1,
            eig.values[i],
            exact[i],
            oracle.xi_raw[i],
            oracle.xi_isotonic[i]
        );
    }
    Ok(())
}
