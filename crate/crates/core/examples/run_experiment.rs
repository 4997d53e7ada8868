//! Runs a configured experiment in memory and prints the Frobenius ratios.
//!
//! ```text
//! cargo run --release --example run_experiment -- configs/example1.toml 1
//! ```

use std::path::PathBuf;

use covshrink::experiment::{load_config, run_experiment_in_memory};

fn main() -> covshrink::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/example1.toml"));
    let mut config = load_config(&path)?;
    if let Some(seed) = args.next() {
        let seed = seed
            .parse()
            .map_err(|_| covshrink::Error::Config(format!("invalid seed {seed:?}")))?;
        config.seeds = vec![seed];
    }
    let (report, outcomes) = run_experiment_in_memory(&config)?;
    println!(
        "N = {}, T = {}, seeds {:?}",
        config.n, config.t, config.seeds
    );
    for m in &report.methods {
        println!(
            "{:<20} {:.4} +- {:.4}",
            m.name, m.frobenius_ratio.mean, m.frobenius_ratio.std
        );
    }
    for outcome in &outcomes {
        for m in outcome
            .methods
            .iter()
            .filter_map(|m| m.fitted.as_ref().map(|f| (&m.name, f)))
        {
            println!("seed {} {}: {:?}", outcome.seed, m.0, m.1.model);
        }
    }
    Ok(())
}
