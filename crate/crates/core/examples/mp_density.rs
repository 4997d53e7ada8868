//! Kernel estimate of a white Wishart spectrum against the Marchenko-Pastur law.

use covshrink::datagen::generate_sandwich;
use covshrink::kde::estimate_spectrum;
use covshrink::linalg::sym_eigenvalues;
use covshrink::metrics::{mp_density, mp_edges};
use covshrink::{AutoModel, CrossModel, NoiseDist};

fn main() -> covshrink::Result<()> {
    let (n, t) = (500, 1000);
    let q = n as f64 / t as f64;
    let identity = CrossModel::TwoPeak {
        low: 1.0,
        high: 1.0,
        fraction_high: 0.0,
    };
    let sample = generate_sandwich(
        &identity,
        &AutoModel::Identity,
        &NoiseDist::Gaussian,
        n,
        t,
        t,
        1,
    )?;
    let lambdas = sym_eigenvalues(&sample.sample_covariance())?;
    let spectrum = estimate_spectrum(&lambdas, t)?;

    let (lo, hi) = mp_edges(q);
    println!(
        "q = {q}, support [{lo:.4}, {hi:.4}], bandwidth {:.4}",
        spectrum.bandwidth
    );
    println!(
        "extreme sample eigenvalues {:.4} .. {:.4}",
        lambdas[0],
        lambdas[n - 1]
    );
    println!("{:>8} {:>10} {:>10}", "lambda", "kde", "mp");
    for k in 0..=10 {
        let x = lo + (hi - lo) * k as f64 / 10.0;
        println!(
            "{x:>8.3} {:>10.4} {:>10.4}",
            spectrum.density_at(x),
            mp_density(x, q)
        );
    }
    Ok(())
}
