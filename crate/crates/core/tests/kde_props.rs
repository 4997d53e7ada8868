use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covshrink::datagen::generate_sandwich;
use covshrink::kde::{compute_u, epanechnikov_density, epanechnikov_hilbert, estimate_spectrum};
use covshrink::linalg::sym_eigenvalues;
use covshrink::{AutoModel, CrossModel, NoiseDist};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + h * k as f64)
        })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `(1/pi) PV int rho(y) / (x - y) dy` for the unit Epanechnikov kernel, by
/// subtracting the singularity of its polynomial extension.
fn kernel_pv(x: f64) -> f64 {
    let poly = |y: f64| 3.0 / (4.0 * SQRT5) * (1.0 - y * y / 5.0);
    let smooth = |y: f64| {
        if (x - y).abs() < 1e-12 {
            // limit of (p(y) - p(x)) / (x - y) = -p'(x)
            3.0 / (4.0 * SQRT5) * 2.0 * x / 5.0
        } else {
            (poly(y) - poly(x)) / (x - y)
        }
    };
    let regular = simpson(smooth, -SQRT5, SQRT5, 2000);
    let log_term = poly(x) * ((x + SQRT5) / (x - SQRT5)).abs().ln();
    (regular + log_term) / PI
}

#[test]
fn kernel_hilbert_matches_principal_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..10 {
        let x: f64 = rng.random_range(-4.0..4.0);
        let closed = epanechnikov_hilbert(x);
        let numeric = kernel_pv(x);
        assert!(
            (closed - numeric).abs() < 1e-6,
            "x = {x}: {closed} vs {numeric}"
        );
    }
    assert!((epanechnikov_hilbert(1.0) - kernel_pv(1.0)).abs() < 1e-6);
}

#[test]
fn kernel_density_integrates_to_one() {
    let mass = simpson(epanechnikov_density, -SQRT5, SQRT5, 1000);
    assert!((mass - 1.0).abs() < 1e-12);
    // quartic integrand: Simpson error is O(h^4)
    let var = simpson(|x| x * x * epanechnikov_density(x), -SQRT5, SQRT5, 1000);
    assert!((var - 1.0).abs() < 1e-8, "{var}");
}

fn white_spectrum(n: usize, t: usize, seed: u64) -> Vec<f64> {
    let cross = CrossModel::TwoPeak {
        low: 1.0,
        high: 1.0,
        fraction_high: 0.0,
    };
    let s = generate_sandwich(
        &cross,
        &AutoModel::Identity,
        &NoiseDist::Gaussian,
        n,
        t,
        t,
        seed,
    )
    .unwrap();
    sym_eigenvalues(&s.sample_covariance()).unwrap()
}

#[test]
fn estimated_density_integrates_to_one() {
    let lambdas = white_spectrum(200, 400, 1);
    let spec = estimate_spectrum(&lambdas, 400).unwrap();
    let (lo, hi) = spec.support();
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let mass: f64 = (0..=steps)
        .map(|k| {
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * spec.density_at(lo + h * k as f64)
        })
        .sum::<f64>()
        * h;
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn estimated_hilbert_matches_principal_value() {
    // small spectrum so the reference integral stays cheap
    let lambdas = [0.6, 0.8, 0.85, 1.1, 1.4, 1.45, 2.0];
    let t = 100;
    let spec = estimate_spectrum(&lambdas, t).unwrap();
    let (lo, hi) = spec.support();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x: f64 = rng.random_range(0.3..2.6);
        let rho_x = spec.density_at(x);
        // PV int rho(y)/(x - y) = int (rho(y) - rho(x))/(x - y) + rho(x) ln|(x - lo)/(x - hi)|
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let regular: f64 = (0..steps)
            .map(|k| {
                let y = lo + h * (k as f64 + 0.5);
                (spec.density_at(y) - rho_x) / (x - y)
            })
            .sum::<f64>()
            * h;
        let pv = (regular + rho_x * ((x - lo) / (x - hi)).abs().ln()) / PI;
        let got = spec.hilbert_at(x);
        assert!((got - pv).abs() < 1e-6, "x = {x}: {got} vs {pv}");
    }
}

#[test]
fn marchenko_pastur_u_at_one() {
    // q m^2 + m (1 + q - z) + 1 = 0 at q = 0.5, z = 1: u = q m = (-1 + i sqrt 7) / 4
    let (n, t, q) = (500, 1000, 0.5);
    let expect_re = -0.25;
    let expect_im = 7f64.sqrt() / 4.0;
    let lambdas = white_spectrum(n, t, 2);
    let spec = estimate_spectrum(&lambdas, t).unwrap();
    let x = 1.0;
    let re = q * (PI * x * spec.hilbert_at(x) - 1.0);
    let im = q * PI * x * spec.density_at(x);
    assert!((re - expect_re).abs() < 0.05, "{re}");
    assert!((im - expect_im).abs() < 0.05, "{im}");
}

#[test]
fn u_vanishes_for_vanishing_q() {
    let lambdas = white_spectrum(50, 100, 4);
    let spec = estimate_spectrum(&lambdas, 100).unwrap();
    for u in compute_u(&spec, 1e-9) {
        assert!(u.norm() < 1e-7);
    }
}

#[test]
fn single_eigenvalue_density() {
    let spec = estimate_spectrum(&[2.0], 1000).unwrap();
    assert!((spec.bandwidth - 0.1).abs() < 1e-15);
    assert!((spec.rho[0] - 1.677_050_983_124_842).abs() < 1e-9);
}

proptest! {
    #[test]
    fn imaginary_parts_are_nonnegative(
        mut lambdas in prop::collection::vec(1e-6f64..10.0, 1..80),
        t in 2usize..5000,
        q in 0.001f64..3.0,
    ) {
        lambdas.sort_by(f64::total_cmp);
        let spec = estimate_spectrum(&lambdas, t).unwrap();
        prop_assert!(spec.rho.iter().all(|r| *r >= 0.0 && r.is_finite()));
        prop_assert!(spec.hilb.iter().all(|h| h.is_finite()));
        prop_assert!(compute_u(&spec, q).iter().all(|u| u.im >= 0.0));
    }
}
