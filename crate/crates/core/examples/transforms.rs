//! psi, its inverse chi and the S-transform for a few autocorrelation models.

use num_complex::Complex64;

use covshrink::{AutoModel, TransformContext};

fn main() -> covshrink::Result<()> {
    let models = [
        AutoModel::Identity,
        AutoModel::ExpDecay { tau: 3.0 },
        AutoModel::Varma {
            ar: vec![0.4],
            ma: vec![0.8, 0.5],
        },
    ];
    let u = Complex64::new(-0.3, 0.4);
    for model in models {
        let ctx = TransformContext::new(model.clone())?;
        let chi = ctx.chi(u)?;
        let back = ctx.psi(chi)?;
        let s = ctx.s_transform(u)?;
        println!("{model:?}");
        println!("  chi({u}) = {chi:.6}");
        println!("  psi(chi) - u = {:.2e}", (back - u).norm());
        println!("  S({u}) = {s:.6}");
    }
    Ok(())
}
