use std::path::Path;

use covshrink::datagen::generate_sandwich;
use covshrink::experiment::{load_config, run_experiment_in_memory, MethodKind, MethodSpec};
use covshrink::fitting::{fit_shrinkage_params, step_grid, FitFamily, FittedModel};
use covshrink::linalg::sym_eigenvalues;
use covshrink::shrinkage::shrink;
use covshrink::{AutoModel, CrossModel, NoiseDist, ShrinkInput, ShrinkMethod};

fn small_input() -> ShrinkInput {
    let cross = CrossModel::TwoPeak {
        low: 1.0,
        high: 3.0,
        fraction_high: 0.5,
    };
    let s = generate_sandwich(
        &cross,
        &AutoModel::ExpDecay { tau: 2.0 },
        &NoiseDist::Gaussian,
        60,
        150,
        150,
        12,
    )
    .unwrap();
    let lambdas = sym_eigenvalues(&s.sample_covariance()).unwrap();
    ShrinkInput::new(&lambdas, 60, 150).unwrap()
}

#[test]
fn planted_tau_is_recovered() {
    let input = small_input();
    let target = shrink(
        &input,
        &ShrinkMethod::Correlated(AutoModel::ExpDecay { tau: 1.5 }),
    )
    .unwrap();
    let fit = fit_shrinkage_params(
        &input,
        &target,
        &FitFamily::ExpDecayTau(step_grid(0.5, 5.0, 0.5)),
    )
    .unwrap();
    assert_eq!(fit.best, FittedModel::ExpDecay { tau: 1.5 });
    assert_eq!(fit.objective, 0.0);
    assert_eq!(fit.evaluations, 10);
    let min = fit
        .trace
        .iter()
        .map(|(_, o)| *o)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(min, fit.objective);
}

#[test]
fn planted_effective_tau_is_recovered() {
    let input = small_input();
    let target = shrink(&input, &ShrinkMethod::EffectiveLp { tau_eff: 0.8 }).unwrap();
    let fit = fit_shrinkage_params(
        &input,
        &target,
        &FitFamily::EffectiveTau(vec![0.4, 0.8, 1.6]),
    )
    .unwrap();
    assert_eq!(fit.best, FittedModel::EffectiveTau { tau_eff: 0.8 });
    assert_eq!(fit.objective, 0.0);
}

#[test]
fn one_point_grid_returns_that_point() {
    let input = small_input();
    let target = vec![1.0; input.n];
    let fit = fit_shrinkage_params(&input, &target, &FitFamily::ExpDecayTau(vec![4.0])).unwrap();
    assert_eq!(fit.best, FittedModel::ExpDecay { tau: 4.0 });
    assert_eq!(fit.evaluations, 1);
    assert!(fit.objective.is_finite() && fit.objective > 0.0);
}

#[test]
fn refining_the_grid_never_increases_the_objective() {
    let input = small_input();
    let target: Vec<f64> = input
        .lambdas()
        .iter()
        .map(|l| if *l < 2.0 { 1.0 } else { 3.0 })
        .collect();
    let mut previous = f64::INFINITY;
    for step in [2.0, 1.0, 0.5, 0.25] {
        let fit = fit_shrinkage_params(
            &input,
            &target,
            &FitFamily::ExpDecayTau(step_grid(0.25, 8.25, step)),
        )
        .unwrap();
        assert!(fit.objective <= previous, "step {step}");
        previous = fit.objective;
    }
}

#[test]
fn varma_grid_enumerates_in_lexicographic_order() {
    let input = small_input();
    let target = shrink(
        &input,
        &ShrinkMethod::Correlated(AutoModel::Varma {
            ar: vec![0.3],
            ma: vec![1.0, 0.2],
        }),
    )
    .unwrap();
    let family = FitFamily::VarmaGrid {
        ma: vec![vec![1.0], vec![0.2, 0.0]],
        ar: vec![vec![0.3, 0.0]],
    };
    let fit = fit_shrinkage_params(&input, &target, &family).unwrap();
    let order: Vec<Vec<f64>> = fit.trace.iter().map(|(p, _)| p.clone()).collect();
    assert_eq!(
        order,
        vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.3],
            vec![1.0, 0.2, 0.0],
            vec![1.0, 0.2, 0.3]
        ]
    );
    assert_eq!(
        fit.best,
        FittedModel::Varma {
            ma: vec![1.0, 0.2],
            ar: vec![0.3]
        }
    );
    assert!(fit.objective < 1e-20);
}

#[test]
fn invalid_grids_are_rejected() {
    let input = small_input();
    let target = vec![1.0; input.n];
    assert!(fit_shrinkage_params(&input, &target, &FitFamily::ExpDecayTau(vec![])).is_err());
    assert!(fit_shrinkage_params(&input, &target, &FitFamily::ExpDecayTau(vec![-1.0])).is_err());
    assert!(fit_shrinkage_params(&input, &target[1..], &FitFamily::exp_decay_default()).is_err());
}

#[test]
fn fitted_tau_on_example_one_data() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut cfg = load_config(&root.join("configs/example1.toml")).unwrap();
    cfg.seeds = vec![1];
    cfg.methods = vec![MethodSpec {
        name: "fit".into(),
        kind: MethodKind::Fit(FitFamily::ExpDecayTau(step_grid(0.5, 5.0, 0.5))),
    }];
    let (report, outcomes) = run_experiment_in_memory(&cfg).unwrap();
    let fitted = outcomes[0].methods[0].fitted.as_ref().unwrap();
    let FittedModel::ExpDecay { tau } = fitted.model else {
        panic!("unexpected model {:?}", fitted.model);
    };
    assert!((tau - 3.0).abs() <= 1.0, "fitted tau {tau}");
    let ratio = report.method("fit").unwrap().frobenius_ratio.mean;
    assert!((ratio - 0.12).abs() < 0.03, "{ratio}");
}
