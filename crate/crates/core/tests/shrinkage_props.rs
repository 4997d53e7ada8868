use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;

use covshrink::datagen::generate_sandwich;
use covshrink::experiment::{load_config, run_experiment_in_memory, MethodKind, MethodSpec};
use covshrink::linalg::sym_eig;
use covshrink::shrinkage::{
    build_estimator, effective_sample_size, shrink, shrink_correlated, shrink_linear, shrink_lp,
    shrink_lp_effective,
};
use covshrink::{AutoModel, CrossModel, NoiseDist, ShrinkInput, ShrinkMethod, TransformContext};

fn input_from(lambdas: &[f64], t: usize) -> ShrinkInput {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    ShrinkInput::new(&sorted, sorted.len(), t).unwrap()
}

#[test]
fn single_point_example() {
    // alpha = -0.5, beta = 0.5 means u = -0.5 + 0.5i and |1 + u|^2 = 0.5
    let u = Complex64::new(-0.5, 0.5);
    let ctx = TransformContext::new(AutoModel::Identity).unwrap();
    let chi = ctx.chi(u).unwrap();
    let xi = 1.0 * chi.im / u.im;
    assert!((xi - 2.0).abs() < 1e-12);
    assert!((1.0 / (Complex64::new(1.0, 0.0) + u).norm_sqr() - 2.0).abs() < 1e-12);
}

#[test]
fn linear_example() {
    assert_eq!(shrink_linear(&[3.0], 0.5).unwrap(), vec![2.0]);
    assert_eq!(shrink_linear(&[3.0, 0.2], 0.0).unwrap(), vec![1.0, 1.0]);
    assert_eq!(shrink_linear(&[3.0, 0.2], 1.0).unwrap(), vec![3.0, 0.2]);
    assert!(shrink_linear(&[1.0], 1.5).is_err());
}

#[test]
fn effective_lp_limits() {
    let input = input_from(&[0.5, 0.8, 1.0, 1.3, 2.1, 2.4], 50);
    // tau_eff -> 0 recovers T_eff = T
    let plain = shrink_lp(&input);
    let near = shrink_lp_effective(&input, 1e-3).unwrap();
    for (a, b) in plain.iter().zip(&near) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((effective_sample_size(100, 1.0) - 100.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert!(shrink_lp_effective(&input, 1e9).is_err());
    assert!(shrink_lp_effective(&input, -1.0).is_err());
}

#[test]
fn estimator_round_trips_through_the_eigenbasis() {
    let s = generate_sandwich(
        &CrossModel::InverseWishart { kappa: 1.0 },
        &AutoModel::ExpDecay { tau: 2.0 },
        &NoiseDist::Gaussian,
        40,
        80,
        80,
        5,
    )
    .unwrap();
    let eig = sym_eig(&s.sample_covariance()).unwrap();
    let input = ShrinkInput::new(&eig.values, 40, 80).unwrap();
    let method = ShrinkMethod::Correlated(AutoModel::ExpDecay { tau: 2.0 });
    let xis = shrink(&input, &method).unwrap();
    let result = build_estimator(&eig, &xis, method).unwrap();
    let back = sym_eig(&result.xi_matrix).unwrap();
    let mut sorted = xis.clone();
    sorted.sort_by(f64::total_cmp);
    for (a, b) in back.values.iter().zip(&sorted) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!((result.xi_matrix.trace() - xis.iter().sum::<f64>()).abs() < 1e-9);
}

fn ascending_spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..5.0, 2..60).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_autocorrelation_reduces_to_lp(lambdas in ascending_spectrum(), t in 20usize..500) {
        let input = input_from(&lambdas, t);
        let ctx = TransformContext::new(AutoModel::Identity).unwrap();
        let full = shrink_correlated(&input, &ctx).unwrap();
        let lp = shrink_lp(&input);
        for (a, b) in full.iter().zip(&lp) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn shrunk_values_are_nonnegative(
        lambdas in ascending_spectrum(),
        t in 20usize..500,
        tau in 0.2f64..8.0,
    ) {
        let input = input_from(&lambdas, t);
        for method in [
            ShrinkMethod::LedoitPeche,
            ShrinkMethod::Correlated(AutoModel::ExpDecay { tau }),
            ShrinkMethod::EffectiveLp { tau_eff: tau },
        ] {
            match shrink(&input, &method) {
                Ok(xis) => prop_assert!(xis.iter().all(|x| *x >= 0.0 && x.is_finite())),
                // a very small effective sample size is rejected, never silently used
                Err(e) => prop_assert!(matches!(method, ShrinkMethod::EffectiveLp { .. }), "{e}"),
            }
        }
    }
}

fn lp_only(path: &str) -> covshrink::experiment::ExperimentConfig {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut cfg = load_config(&root.join(path)).unwrap();
    cfg.seeds = vec![1];
    cfg.methods = vec![MethodSpec {
        name: "lp".into(),
        kind: MethodKind::Shrink(ShrinkMethod::LedoitPeche),
    }];
    cfg
}

#[test]
fn lp_improves_on_the_sample_covariance() {
    for path in [
        "configs/example1.toml",
        "configs/example2.toml",
        "configs/example3.toml",
    ] {
        let (report, _) = run_experiment_in_memory(&lp_only(path)).unwrap();
        let ratio = report.method("lp").unwrap().frobenius_ratio.mean;
        assert!(ratio < 1.0, "{path}: {ratio}");
    }
}

#[test]
fn correlated_estimator_preserves_the_trace() {
    // Tr Xi against Tr C = 2N for the two-peak spectrum with mean 2
    let mut cfg = lp_only("configs/example1.toml");
    cfg.methods = vec![MethodSpec {
        name: "correlated".into(),
        kind: MethodKind::Shrink(ShrinkMethod::Correlated(AutoModel::ExpDecay { tau: 3.0 })),
    }];
    let (_, outcomes) = run_experiment_in_memory(&cfg).unwrap();
    let total: f64 = outcomes[0].methods[0].xis.iter().sum();
    let target = 2.0 * cfg.n as f64;
    assert!(
        (total - target).abs() < 0.05 * target,
        "{total} vs {target}"
    );
}
