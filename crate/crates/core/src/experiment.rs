//! End-to-end synthetic experiments: configuration, per-seed pipeline,
//! aggregated report and plot-ready CSV output.
//!
//! Configuration is TOML. Top-level keys `n`, `t`, `seeds` and an optional
//! `output_dir`, then the sections `[cv]`, `[cross]`, `[auto]`, `[noise]`,
//! `[numerics]` and any number of `[[methods]]`. Unknown keys are rejected.
//! See the README for the full grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::SandwichGenerator;
use crate::error::{Error, Result};
use crate::fitting::{fit_shrinkage_params_with_settings, FitFamily, FittedModel};
use crate::linalg::{reconstruct, sym_eig};
use crate::metrics::{frobenius_ratio, MetricReport};
use crate::model::{AutoModel, CrossModel, NoiseDist};
use crate::oracle::{oracle_cv, oracle_exact, CvConfig, OracleResult};
use crate::shrinkage::{shrink_with_settings, ShrinkInput, ShrinkMethod};
use crate::transforms::TransformSettings;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "covshrink-out";
/// Points in `density_grid.csv`.
pub const DENSITY_GRID_POINTS: usize = 400;

/// What a configured method computes.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    /// `xi_i = v_i^T C v_i` (uses the true `C`).
    OracleExact,
    /// Cross-validation oracle, rank-paired with the sample eigenvalues.
    OracleMwcv,
    /// Isotonic regression of the cross-validation oracle.
    Isotonic,
    Shrink(ShrinkMethod),
    /// Parameters fitted to the cross-validation oracle, then applied.
    Fit(FitFamily),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    /// Unique label; also names the spectra CSV.
    pub name: String,
    pub kind: MethodKind,
}

/// Validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub t: usize,
    pub cv: CvConfig,
    pub cross: CrossModel,
    pub auto_true: AutoModel,
    pub noise: NoiseDist,
    pub methods: Vec<MethodSpec>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub numerics: TransformSettings,
}

impl ExperimentConfig {
    /// Columns generated per seed: `T + K T_out`.
    pub fn t_total(&self) -> usize {
        self.cv.required_width()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.t == 0 || self.t * 100 < self.n {
            return bad(format!("t must satisfy t >= n/100, got t = {}", self.t));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.cv.t_train != self.t {
            return bad("cv.t_train must equal t".into());
        }
        self.cv
            .validate(self.t_total())
            .map_err(|e| Error::Config(e.to_string()))?;
        let config_err = |e: Error| Error::Config(e.to_string());
        self.cross.validate().map_err(config_err)?;
        self.auto_true.validate().map_err(config_err)?;
        self.noise.validate().map_err(config_err)?;
        self.numerics.validate().map_err(config_err)?;
        let mut names: Vec<&str> = Vec::new();
        for m in &self.methods {
            if m.name.is_empty()
                || !m
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return bad(format!(
                    "method name {:?} must be non-empty ASCII letters, digits, '_' or '-'",
                    m.name
                ));
            }
            if names.contains(&m.name.as_str()) {
                return bad(format!("duplicate method name {:?}", m.name));
            }
            names.push(&m.name);
            match &m.kind {
                MethodKind::Shrink(ShrinkMethod::Correlated(a)) => {
                    a.validate().map_err(config_err)?
                }
                MethodKind::Shrink(ShrinkMethod::EffectiveLp { tau_eff }) if *tau_eff <= 0.0 => {
                    return bad(format!("{}: tau_eff must be positive", m.name));
                }
                MethodKind::Shrink(ShrinkMethod::Linear { alpha })
                    if !(0.0..=1.0).contains(alpha) =>
                {
                    return bad(format!("{}: alpha must lie in [0, 1]", m.name));
                }
                MethodKind::Fit(f) => f.validate().map_err(config_err)?,
                _ => {}
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// TOML representation

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    t: usize,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    cv: RawCv,
    cross: RawCross,
    #[serde(default)]
    auto: RawAuto,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    methods: Vec<RawMethod>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCv {
    k_folds: Option<usize>,
    t_out: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawCross {
    TwoPeak {
        low: f64,
        high: f64,
        fraction_high: f64,
    },
    InverseWishart {
        kappa: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawAuto {
    #[default]
    Identity,
    ExpDecay {
        tau: f64,
    },
    Varma {
        #[serde(default)]
        ar: Vec<f64>,
        ma: Vec<f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawNoise {
    #[default]
    Gaussian,
    StudentT {
        nu: f64,
        #[serde(default = "yes")]
        standardized: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    quadrature_points: Option<usize>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawMethod {
    OracleExact {
        name: Option<String>,
    },
    OracleMwcv {
        name: Option<String>,
    },
    Isotonic {
        name: Option<String>,
    },
    Lp {
        name: Option<String>,
    },
    EffectiveLp {
        name: Option<String>,
        tau_eff: f64,
    },
    EffectiveLpFit {
        name: Option<String>,
        grid: Option<Vec<f64>>,
    },
    Correlated {
        name: Option<String>,
        tau: Option<f64>,
        ar: Option<Vec<f64>>,
        ma: Option<Vec<f64>>,
    },
    ExpDecayFit {
        name: Option<String>,
        grid: Option<Vec<f64>>,
    },
    VarmaFit {
        name: Option<String>,
        ma_grids: Option<Vec<Vec<f64>>>,
        ar_grids: Option<Vec<Vec<f64>>>,
    },
    Linear {
        name: Option<String>,
        alpha: f64,
    },
}

impl RawMethod {
    fn into_spec(self, auto_true: &AutoModel) -> Result<MethodSpec> {
        let named = |name: Option<String>, default: &str, kind| MethodSpec {
            name: name.unwrap_or_else(|| default.to_string()),
            kind,
        };
        Ok(match self {
            RawMethod::OracleExact { name } => named(name, "oracle_exact", MethodKind::OracleExact),
            RawMethod::OracleMwcv { name } => named(name, "oracle_mwcv", MethodKind::OracleMwcv),
            RawMethod::Isotonic { name } => named(name, "isotonic", MethodKind::Isotonic),
            RawMethod::Lp { name } => {
                named(name, "lp", MethodKind::Shrink(ShrinkMethod::LedoitPeche))
            }
            RawMethod::EffectiveLp { name, tau_eff } => named(
                name,
                "effective_lp",
                MethodKind::Shrink(ShrinkMethod::EffectiveLp { tau_eff }),
            ),
            RawMethod::EffectiveLpFit { name, grid } => named(
                name,
                "effective_lp_fit",
                MethodKind::Fit(FitFamily::EffectiveTau(
                    grid.unwrap_or_else(FitFamily::default_tau_grid),
                )),
            ),
            RawMethod::Correlated { name, tau, ar, ma } => {
                let model = match (tau, ar, ma) {
                    (None, None, None) => auto_true.clone(),
                    (Some(tau), None, None) => AutoModel::ExpDecay { tau },
                    (None, ar, Some(ma)) => AutoModel::Varma {
                        ar: ar.unwrap_or_default(),
                        ma,
                    },
                    _ => {
                        return Err(Error::Config(
                            "correlated method takes either tau, or ma with optional ar".into(),
                        ))
                    }
                };
                named(
                    name,
                    "correlated",
                    MethodKind::Shrink(ShrinkMethod::Correlated(model)),
                )
            }
            RawMethod::ExpDecayFit { name, grid } => named(
                name,
                "exp_decay_fit",
                MethodKind::Fit(FitFamily::ExpDecayTau(
                    grid.unwrap_or_else(FitFamily::default_tau_grid),
                )),
            ),
            RawMethod::VarmaFit {
                name,
                ma_grids,
                ar_grids,
            } => {
                let family = match (ma_grids, ar_grids) {
                    (None, None) => FitFamily::varma11_default(),
                    (Some(ma), ar) => FitFamily::VarmaGrid {
                        ma,
                        ar: ar.unwrap_or_default(),
                    },
                    (None, Some(_)) => {
                        return Err(Error::Config(
                            "varma_fit: ar_grids requires ma_grids".into(),
                        ))
                    }
                };
                named(name, "varma_fit", MethodKind::Fit(family))
            }
            RawMethod::Linear { name, alpha } => named(
                name,
                "linear",
                MethodKind::Shrink(ShrinkMethod::Linear { alpha }),
            ),
        })
    }
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let seeds = raw
        .seeds
        .ok_or_else(|| Error::Config("missing required key `seeds`".into()))?;
    let cross = match raw.cross {
        RawCross::TwoPeak {
            low,
            high,
            fraction_high,
        } => CrossModel::TwoPeak {
            low,
            high,
            fraction_high,
        },
        RawCross::InverseWishart { kappa } => CrossModel::InverseWishart { kappa },
    };
    let auto_true = match raw.auto {
        RawAuto::Identity => AutoModel::Identity,
        RawAuto::ExpDecay { tau } => AutoModel::ExpDecay { tau },
        RawAuto::Varma { ar, ma } => AutoModel::Varma { ar, ma },
    };
    let noise = match raw.noise {
        RawNoise::Gaussian => NoiseDist::Gaussian,
        RawNoise::StudentT { nu, standardized } => NoiseDist::StudentT { nu, standardized },
    };
    let defaults = TransformSettings::default();
    let numerics = TransformSettings {
        quadrature_points: raw
            .numerics
            .quadrature_points
            .unwrap_or(defaults.quadrature_points),
        newton_tol: raw.numerics.newton_tol.unwrap_or(defaults.newton_tol),
        newton_max_iter: raw
            .numerics
            .newton_max_iter
            .unwrap_or(defaults.newton_max_iter),
    };
    let methods = raw
        .methods
        .into_iter()
        .map(|m| m.into_spec(&auto_true))
        .collect::<Result<Vec<_>>>()?;
    let config = ExperimentConfig {
        n: raw.n,
        t: raw.t,
        cv: CvConfig::new(
            raw.cv.k_folds.unwrap_or(CvConfig::DEFAULT_K),
            raw.cv.t_out.unwrap_or(CvConfig::DEFAULT_T_OUT),
            raw.t,
        ),
        cross,
        auto_true,
        noise,
        methods,
        seeds,
        output_dir: raw
            .output_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        numerics,
    };
    config.validate()?;
    Ok(config)
}

/// Reads and parses a configuration file. Every failure is a config error.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

// ---------------------------------------------------------------------------
// Running

/// Everything computed for one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub oracle: OracleResult,
    /// Kernel density of the sample spectrum on a uniform grid.
    pub density_grid: Vec<(f64, f64)>,
    pub methods: Vec<MethodOutcome>,
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub name: String,
    pub xis: Vec<f64>,
    pub metrics: MetricReport,
    pub fitted: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub model: FittedModel,
    pub objective: f64,
    pub evaluations: usize,
}

/// Runs every configured method on one seed.
pub fn run_seed(
    config: &ExperimentConfig,
    generator: &SandwichGenerator,
    seed: u64,
) -> Result<SeedOutcome> {
    let sample = generator.sample(seed)?;
    let e = sample.sample_covariance();
    let eig = sym_eig(&e)?;
    let input = ShrinkInput::new(&eig.values, config.n, config.t)?;
    let oracle = oracle_cv(&sample.y, &config.cv, input.lambdas())?;
    let density_grid = density_grid(&input);

    let mut methods = Vec::with_capacity(config.methods.len());
    for spec in &config.methods {
        let mut fitted = None;
        let xis = match &spec.kind {
            MethodKind::OracleExact => oracle_exact(&eig, &sample.c_true)?,
            MethodKind::OracleMwcv => oracle.xi_raw.clone(),
            MethodKind::Isotonic => oracle.xi_isotonic.clone(),
            MethodKind::Shrink(method) => shrink_with_settings(&input, method, &config.numerics)?,
            MethodKind::Fit(family) => {
                let fit = fit_shrinkage_params_with_settings(
                    &input,
                    &oracle.xi_raw,
                    family,
                    &config.numerics,
                )?;
                let xis = shrink_with_settings(&input, &fit.best.method(), &config.numerics)?;
                fitted = Some(FitSummary {
                    model: fit.best,
                    objective: fit.objective,
                    evaluations: fit.evaluations,
                });
                xis
            }
        };
        let estimator = reconstruct(&eig.vectors, &xis)?;
        let metrics = frobenius_ratio(&estimator, &e, &sample.c_true)?;
        methods.push(MethodOutcome {
            name: spec.name.clone(),
            xis,
            metrics,
            fitted,
        });
    }
    Ok(SeedOutcome {
        seed,
        lambdas: input.lambdas().to_vec(),
        oracle,
        density_grid,
        methods,
    })
}

fn density_grid(input: &ShrinkInput) -> Vec<(f64, f64)> {
    let (lo, hi) = input.spectrum.support();
    let lo = lo.max(0.0);
    let step = (hi - lo) / (DENSITY_GRID_POINTS - 1) as f64;
    (0..DENSITY_GRID_POINTS)
        .map(|k| {
            let x = lo + step * k as f64;
            (x, input.spectrum.density_at(x))
        })
        .collect()
}

/// Mean, sample standard deviation and per-seed values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub per_seed: Vec<f64>,
}

impl Summary {
    fn from_values(values: &[f64]) -> Summary {
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary {
            mean: round4(mean),
            std: round4(std),
            per_seed: values.iter().map(|&v| round4(v)).collect(),
        }
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub objective: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub name: String,
    pub frobenius_ratio: Summary,
    pub mse_estimator: Summary,
    pub mse_sample: Summary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fitted: Vec<FitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedStatus {
    pub seed: u64,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub n: usize,
    pub t: usize,
    pub t_total: usize,
    pub q: f64,
    pub k_folds: usize,
    pub t_out: usize,
    pub bandwidth: f64,
    pub cross: String,
    pub auto: String,
    pub noise: String,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub run: RunInfo,
    pub seeds: Vec<SeedStatus>,
    pub methods: Vec<MethodReport>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl ExperimentReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn successful_seeds(&self) -> usize {
        self.seeds.iter().filter(|s| s.ok).count()
    }
}

/// Runs all seeds and aggregates, without touching the filesystem.
///
/// A seed that hits any error is recorded as failed and skipped. Fails when
/// no seed succeeds.
pub fn run_experiment_in_memory(
    config: &ExperimentConfig,
) -> Result<(ExperimentReport, Vec<SeedOutcome>)> {
    config.validate()?;
    let generator = SandwichGenerator::new(
        config.cross.clone(),
        config.auto_true.clone(),
        config.noise,
        config.n,
        config.t,
        config.t_total(),
    )?;
    let mut statuses = Vec::new();
    let mut outcomes = Vec::new();
    let mut last_error = None;
    for &seed in &config.seeds {
        match run_seed(config, &generator, seed) {
            Ok(outcome) => {
                statuses.push(SeedStatus {
                    seed,
                    ok: true,
                    error: None,
                });
                outcomes.push(outcome);
            }
            Err(e) => {
                statuses.push(SeedStatus {
                    seed,
                    ok: false,
                    error: Some(e.to_string()),
                });
                last_error = Some(e);
            }
        }
    }
    if outcomes.is_empty() {
        return Err(last_error.expect("at least one seed ran"));
    }

    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let pick = |f: fn(&MetricReport) -> f64| {
                outcomes
                    .iter()
                    .map(|o| f(&o.methods[k].metrics))
                    .collect::<Vec<_>>()
            };
            let fitted = outcomes
                .iter()
                .filter_map(|o| {
                    o.methods[k].fitted.as_ref().map(|f| FitRecord {
                        seed: o.seed,
                        params: f
                            .model
                            .labeled()
                            .into_iter()
                            .map(|(k, v)| (k, round4(v)))
                            .collect(),
                        objective: f.objective,
                        evaluations: f.evaluations,
                    })
                })
                .collect();
            MethodReport {
                name: spec.name.clone(),
                frobenius_ratio: Summary::from_values(&pick(|m| m.frobenius_ratio)),
                mse_estimator: Summary::from_values(&pick(|m| m.mse_estimator)),
                mse_sample: Summary::from_values(&pick(|m| m.mse_sample)),
                fitted,
            }
        })
        .collect();

    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        run: RunInfo {
            n: config.n,
            t: config.t,
            t_total: config.t_total(),
            q: config.n as f64 / config.t as f64,
            k_folds: config.cv.k_folds,
            t_out: config.cv.t_out,
            bandwidth: crate::kde::bandwidth(config.t),
            cross: format!("{:?}", config.cross),
            auto: format!("{:?}", config.auto_true),
            noise: format!("{:?}", config.noise),
        },
        seeds: statuses,
        methods,
        files: Vec::new(),
    };
    Ok((report, outcomes))
}

/// Runs the experiment and writes `report.json` plus CSVs into
/// `config.output_dir`. CSVs describe the first successful seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (mut report, outcomes) = run_experiment_in_memory(config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let first = &outcomes[0];
    let mut files = Vec::new();

    for m in &first.methods {
        let file = format!("spectra_{}.csv", m.name);
        write_csv(
            &dir.join(&file),
            "rank,lambda,xi",
            first
                .lambdas
                .iter()
                .zip(&m.xis)
                .enumerate()
                .map(|(i, (l, x))| format!("{},{l:.10e},{x:.10e}", i + 1)),
        )?;
        files.push(file);
    }
    write_csv(
        &dir.join("density_grid.csv"),
        "lambda,rho",
        first
            .density_grid
            .iter()
            .map(|(x, r)| format!("{x:.10e},{r:.10e}")),
    )?;
    files.push("density_grid.csv".into());
    write_csv(
        &dir.join("oracle_scatter.csv"),
        "rank,lambda,xi_mwcv",
        first
            .lambdas
            .iter()
            .zip(&first.oracle.xi_raw)
            .enumerate()
            .map(|(i, (l, x))| format!("{},{l:.10e},{x:.10e}", i + 1)),
    )?;
    files.push("oracle_scatter.csv".into());
    files.push("report.json".into());
    files.sort();
    report.files = files;

    let json =
        serde_json::to_string_pretty(&report).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    Ok(report)
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        writeln!(out, "{row}").expect("writing to a String");
    }
    fs::write(path, out)?;
    Ok(())
}
