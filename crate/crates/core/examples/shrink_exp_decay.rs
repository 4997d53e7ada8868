//! Cleans a sample covariance of exponentially autocorrelated data and
//! compares the Ledoit-Peche and autocorrelation-aware estimators.

use covshrink::datagen::generate_sandwich;
use covshrink::linalg::{reconstruct, sym_eig};
use covshrink::metrics::frobenius_ratio;
use covshrink::shrinkage::shrink;
use covshrink::{AutoModel, CrossModel, NoiseDist, ShrinkInput, ShrinkMethod};

fn main() -> covshrink::Result<()> {
    let (n, t) = (300, 600);
    let cross = CrossModel::TwoPeak {
        low: 1.0,
        high: 3.0,
        fraction_high: 0.5,
    };
    let auto = AutoModel::ExpDecay { tau: 3.0 };
    let sample = generate_sandwich(&cross, &auto, &NoiseDist::Gaussian, n, t, t, 7)?;
    let e = sample.sample_covariance();
    let eig = sym_eig(&e)?;
    let input = ShrinkInput::new(&eig.values, n, t)?;

    for method in [
        ShrinkMethod::Linear { alpha: 0.5 },
        ShrinkMethod::LedoitPeche,
        ShrinkMethod::EffectiveLp { tau_eff: 3.0 },
        ShrinkMethod::Correlated(auto.clone()),
    ] {
        let xis = shrink(&input, &method)?;
        let estimator = reconstruct(&eig.vectors, &xis)?;
        let ratio = frobenius_ratio(&estimator, &e, &sample.c_true)?.frobenius_ratio;
        println!("{:<45} ratio {:.3}", format!("{method:?}"), ratio);
    }
    Ok(())
}
