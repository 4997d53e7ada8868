use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use covshrink::experiment::{load_config, run_experiment};
use covshrink::freeprob::{verify_mp_scalar, verify_s_rect};
use covshrink::{AutoModel, CrossModel, Error};

#[derive(Parser)]
#[command(
    name = "covshrink",
    version,
    about = "Covariance shrinkage for autocorrelated samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a synthetic experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds, overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of the scalar Marchenko-Pastur equation with C = I.
    VerifyMp {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long, value_enum, default_value_t = AutoArg::Identity)]
        auto: AutoArg,
        /// Decay time for `--auto exp-decay`.
        #[arg(long, default_value_t = 3.0)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo check of the rectangular S-transform relation.
    VerifySrect {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AutoArg {
    Identity,
    ExpDecay,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, seeds, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            for s in report.seeds.iter().filter(|s| !s.ok) {
                eprintln!(
                    "seed {} failed: {}",
                    s.seed,
                    s.error.as_deref().unwrap_or("unknown error")
                );
            }
            println!("{:<20} {:>10} {:>10}", "method", "ratio", "std");
            for m in &report.methods {
                println!(
                    "{:<20} {:>10.4} {:>10.4}",
                    m.name, m.frobenius_ratio.mean, m.frobenius_ratio.std
                );
            }
            println!("wrote {}", cfg.output_dir.join("report.json").display());
        }
        Command::VerifyMp {
            q,
            n,
            draws,
            auto,
            tau,
            seed,
        } => {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::Config(format!("q must be positive, got {q}")));
            }
            let t = (n as f64 / q).round() as usize;
            let auto = match auto {
                AutoArg::Identity => AutoModel::Identity,
                AutoArg::ExpDecay => AutoModel::ExpDecay { tau },
            };
            let identity = CrossModel::TwoPeak {
                low: 1.0,
                high: 1.0,
                fraction_high: 0.0,
            };
            let check = verify_mp_scalar(&identity, &auto, n, t, draws, seed)?;
            let points: Vec<_> = check
                .points
                .iter()
                .zip(check.m_empirical.iter().zip(&check.m_predicted))
                .map(|(z, (e, p))| {
                    json!({
                        "z": [z.re, z.im],
                        "m_empirical": [e.re, e.im],
                        "m_predicted": [p.re, p.im],
                    })
                })
                .collect();
            let out = json!({
                "n": n, "t": t, "draws": draws,
                "max_residual": check.max_residual,
                "points": points,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("valid JSON")
            );
        }
        Command::VerifySrect { n, t, draws, seed } => {
            let report = verify_s_rect(n, t, draws, seed)?;
            let out = json!({
                "n": n, "t": t, "draws": draws, "q": report.q,
                "relation_residual": report.relation_residual,
                "wishart_residual": report.wishart_residual,
                "moments": {
                    "wv": report.wv_moments,
                    "vw": report.vw_moments,
                    "wishart": report.wishart_moments,
                },
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("valid JSON")
            );
        }
    }
    Ok(())
}
