//! Transform checks against finite Toeplitz matrices and round trips on
//! models without closed forms.

use num_complex::Complex64 as C64;

use covshrink::datagen::build_auto_toeplitz;
use covshrink::linalg::sym_eigenvalues;
use covshrink::transforms::exp_decay_chi;
use covshrink::{AutoModel, TransformContext};

fn var2() -> AutoModel {
    AutoModel::Varma {
        ar: vec![0.5, -0.3],
        ma: vec![1.0],
    }
}

fn vma2() -> AutoModel {
    AutoModel::Varma {
        ar: vec![],
        ma: vec![1.0, 0.5, 0.3],
    }
}

fn varma11() -> AutoModel {
    AutoModel::Varma {
        ar: vec![0.4],
        ma: vec![0.8, 0.5],
    }
}

/// `(1/T) sum_k z l_k / (1 - z l_k)` over the eigenvalues of the `T x T`
/// autocorrelation matrix.
fn finite_psi(spectrum: &[f64], z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    spectrum.iter().map(|&l| z * l / (one - z * l)).sum::<C64>() / spectrum.len() as f64
}

#[test]
fn psi_matches_large_toeplitz_spectra() {
    let t = 2048;
    let points = [C64::new(0.3, 0.5), C64::new(-0.4, 0.2), C64::new(0.1, -0.7)];
    for model in [AutoModel::ExpDecay { tau: 3.0 }, var2(), vma2(), varma11()] {
        let spectrum = sym_eigenvalues(&build_auto_toeplitz(&model, t).unwrap()).unwrap();
        let ctx = TransformContext::new(model.clone()).unwrap();
        for z in points {
            let exact = ctx.psi(z).unwrap();
            let finite = finite_psi(&spectrum, z);
            // boundary effects of the truncated Toeplitz matrix are O(1/T)
            assert!(
                (exact - finite).norm() < 5e-3,
                "{model:?} at {z}: {exact} vs {finite}"
            );
        }
    }
}

#[test]
fn chi_inverts_psi_near_the_origin() {
    for model in [var2(), vma2(), varma11()] {
        let ctx = TransformContext::new(model.clone()).unwrap();
        for i in 1..=5 {
            let r = 0.1 * i as f64;
            for k in 1..6 {
                let theta = k as f64 * std::f64::consts::PI / 6.0;
                let z = C64::from_polar(r, theta);
                let u = ctx.psi(z).unwrap();
                let x = ctx.chi(u).unwrap();
                assert!(x.im >= 0.0, "{model:?}: chi({u}) = {x}");
                let back = ctx.psi(x).unwrap();
                assert!((back - u).norm() < 1e-10, "{model:?} at r = {r}, k = {k}");
            }
        }
    }
}

#[test]
fn chi_commutes_with_conjugation() {
    let ctx = TransformContext::new(var2()).unwrap();
    let u = C64::new(0.2, 0.3);
    let up = ctx.chi(u).unwrap();
    let down = ctx.chi(u.conj()).unwrap();
    assert!((up.conj() - down).norm() < 1e-14);
}

#[test]
fn s_transform_is_one_at_the_origin() {
    for model in [
        AutoModel::Identity,
        AutoModel::ExpDecay { tau: 2.0 },
        var2(),
        vma2(),
    ] {
        let ctx = TransformContext::new(model.clone()).unwrap();
        let s = ctx.s_transform(C64::new(1e-4, 0.0)).unwrap();
        assert!((s - 1.0).norm() < 1e-3, "{model:?}: {s}");
        assert_eq!(
            ctx.s_transform(C64::new(0.0, 0.0)).unwrap(),
            C64::new(1.0, 0.0)
        );
    }
}

#[test]
fn identity_chi_is_mobius() {
    let ctx = TransformContext::new(AutoModel::Identity).unwrap();
    let u = C64::new(-0.3, 0.8);
    let expect = u / (u + 1.0);
    assert!((ctx.chi(u).unwrap() - expect).norm() < 1e-15);
}

#[test]
fn exp_decay_numeric_route_agrees_with_closed_form() {
    // the VAR(1) form of the same autocorrelation goes through quadrature and Newton
    for tau in [0.5f64, 3.0, 10.0] {
        let numeric = TransformContext::new(AutoModel::var1_from_tau(tau)).unwrap();
        let gamma = AutoModel::ExpDecay { tau }.gamma().unwrap();
        for u in [C64::new(0.3, 0.4), C64::new(-0.6, 0.2), C64::new(1.5, 0.05)] {
            let a = numeric.chi(u).unwrap();
            let b = exp_decay_chi(gamma, u);
            assert!((a - b).norm() < 1e-9, "tau = {tau}, u = {u}: {a} vs {b}");
        }
    }
}
