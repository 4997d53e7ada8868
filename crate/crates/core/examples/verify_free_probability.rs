//! Monte Carlo checks of the scalar Marchenko-Pastur equation and the
//! rectangular S-transform relation.

use covshrink::freeprob::{verify_mp_scalar, verify_s_rect, MP_TEST_IM, MP_TEST_RE};
use covshrink::{AutoModel, CrossModel};

fn main() -> covshrink::Result<()> {
    let identity = CrossModel::TwoPeak {
        low: 1.0,
        high: 1.0,
        fraction_high: 0.0,
    };
    for auto in [AutoModel::Identity, AutoModel::ExpDecay { tau: 3.0 }] {
        let check = verify_mp_scalar(&identity, &auto, 200, 400, 20, 0)?;
        println!("{auto:?}: max residual {:.2e}", check.max_residual);
        for (z, (m_e, m_p)) in check
            .points
            .iter()
            .zip(check.m_empirical.iter().zip(&check.m_predicted))
        {
            println!("  z = {z:.2}  empirical {m_e:.4}  predicted {m_p:.4}");
        }
    }
    println!("test abscissae {MP_TEST_RE:?} at Im z = {MP_TEST_IM}");

    let report = verify_s_rect(200, 400, 50, 1)?;
    println!(
        "S-rect: relation residual {:.2e}, Wishart residual {:.2e}",
        report.relation_residual, report.wishart_residual
    );
    Ok(())
}
