//! Grid search for shrinkage parameters that best match a target curve,
//! normally the cross-validation oracle.
//!
//! The objective is `(1/N) sum_i (xi_i(params) - target_i)^2`. Candidates
//! are visited in lexicographic order of their parameter vectors and the
//! first minimum wins, so ties resolve to the smallest parameters.

use crate::error::{Error, Result};
use crate::model::AutoModel;
use crate::shrinkage::{shrink_correlated, shrink_lp_effective, ShrinkInput, ShrinkMethod};
use crate::transforms::{TransformContext, TransformSettings};

/// Parameter family and its grid.
#[derive(Debug, Clone, PartialEq)]
pub enum FitFamily {
    /// `tau` of the exponential-decay model.
    ExpDecayTau(Vec<f64>),
    /// `tau_eff` of the effective-sample-size Ledoit-Peche estimator.
    EffectiveTau(Vec<f64>),
    /// VARMA coefficients. `ma[a]` is the grid of `a_a`, `ar[b]` that of
    /// `b_{b+1}`; parameter vectors are ordered `(a_0, a_1, .., b_1, ..)`.
    VarmaGrid {
        ma: Vec<Vec<f64>>,
        ar: Vec<Vec<f64>>,
    },
}

impl FitFamily {
    /// 60 log-spaced values of `tau` in `[0.05, 20]`.
    pub fn default_tau_grid() -> Vec<f64> {
        log_grid(0.05, 20.0, 60)
    }

    pub fn exp_decay_default() -> Self {
        FitFamily::ExpDecayTau(Self::default_tau_grid())
    }

    pub fn effective_tau_default() -> Self {
        FitFamily::EffectiveTau(Self::default_tau_grid())
    }

    /// VARMA(1,1): `a_0` in 0.5..=1.0, `a_1` and `b_1` in 0.0..=0.6, step 0.1.
    pub fn varma11_default() -> Self {
        FitFamily::VarmaGrid {
            ma: vec![step_grid(0.5, 1.0, 0.1), step_grid(0.0, 0.6, 0.1)],
            ar: vec![step_grid(0.0, 0.6, 0.1)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FitFamily::ExpDecayTau(_) => "exp_decay_tau",
            FitFamily::EffectiveTau(_) => "effective_tau",
            FitFamily::VarmaGrid { .. } => "varma_grid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |grid: &[f64], positive: bool, label: &str| -> Result<()> {
            if grid.is_empty() {
                return Err(Error::InvalidParameter(format!("{label} grid is empty")));
            }
            if grid
                .iter()
                .any(|v| !v.is_finite() || (positive && *v <= 0.0))
            {
                return Err(Error::InvalidParameter(format!(
                    "{label} grid must be finite{}",
                    if positive { " and positive" } else { "" }
                )));
            }
            Ok(())
        };
        match self {
            FitFamily::ExpDecayTau(g) => check(g, true, "tau"),
            FitFamily::EffectiveTau(g) => check(g, true, "tau_eff"),
            FitFamily::VarmaGrid { ma, ar } => {
                if ma.is_empty() {
                    return Err(Error::InvalidParameter(
                        "VARMA grid needs at least one moving-average coefficient".into(),
                    ));
                }
                ma.iter()
                    .try_for_each(|g| check(g, false, "moving-average"))?;
                ar.iter()
                    .try_for_each(|g| check(g, false, "autoregressive"))
            }
        }
    }

    /// Candidate parameter vectors in lexicographic order.
    fn candidates(&self) -> Vec<Vec<f64>> {
        match self {
            FitFamily::ExpDecayTau(g) | FitFamily::EffectiveTau(g) => {
                sorted(g).into_iter().map(|v| vec![v]).collect()
            }
            FitFamily::VarmaGrid { ma, ar } => {
                let axes: Vec<Vec<f64>> = ma.iter().chain(ar).map(|g| sorted(g)).collect();
                cartesian(&axes)
            }
        }
    }

    fn model(&self, params: &[f64]) -> FittedModel {
        match self {
            FitFamily::ExpDecayTau(_) => FittedModel::ExpDecay { tau: params[0] },
            FitFamily::EffectiveTau(_) => FittedModel::EffectiveTau { tau_eff: params[0] },
            FitFamily::VarmaGrid { ma, .. } => FittedModel::Varma {
                ma: params[..ma.len()].to_vec(),
                ar: params[ma.len()..].to_vec(),
            },
        }
    }
}

/// A fitted parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    ExpDecay { tau: f64 },
    EffectiveTau { tau_eff: f64 },
    Varma { ma: Vec<f64>, ar: Vec<f64> },
}

impl FittedModel {
    /// The shrinkage method these parameters define.
    pub fn method(&self) -> ShrinkMethod {
        match self {
            FittedModel::ExpDecay { tau } => {
                ShrinkMethod::Correlated(AutoModel::ExpDecay { tau: *tau })
            }
            FittedModel::EffectiveTau { tau_eff } => {
                ShrinkMethod::EffectiveLp { tau_eff: *tau_eff }
            }
            FittedModel::Varma { ma, ar } => ShrinkMethod::Correlated(AutoModel::Varma {
                ar: ar.clone(),
                ma: ma.clone(),
            }),
        }
    }

    /// `(label, value)` pairs, e.g. `("a0", 0.8)`.
    pub fn labeled(&self) -> Vec<(String, f64)> {
        match self {
            FittedModel::ExpDecay { tau } => vec![("tau".into(), *tau)],
            FittedModel::EffectiveTau { tau_eff } => vec![("tau_eff".into(), *tau_eff)],
            FittedModel::Varma { ma, ar } => ma
                .iter()
                .enumerate()
                .map(|(k, v)| (format!("a{k}"), *v))
                .chain(
                    ar.iter()
                        .enumerate()
                        .map(|(k, v)| (format!("b{}", k + 1), *v)),
                )
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub best: FittedModel,
    pub objective: f64,
    pub evaluations: usize,
    /// Every candidate with its objective (`+inf` where shrinkage failed).
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Exhaustive search over `family` for the parameters whose shrinkage curve
/// is closest to `target` in mean squared deviation.
pub fn fit_shrinkage_params(
    input: &ShrinkInput,
    target: &[f64],
    family: &FitFamily,
) -> Result<FitResult> {
    fit_shrinkage_params_with_settings(input, target, family, &TransformSettings::default())
}

/// As [`fit_shrinkage_params`], with explicit numerical settings.
pub fn fit_shrinkage_params_with_settings(
    input: &ShrinkInput,
    target: &[f64],
    family: &FitFamily,
    settings: &TransformSettings,
) -> Result<FitResult> {
    family.validate()?;
    settings.validate()?;
    if target.len() != input.n {
        return Err(Error::Dimension(format!(
            "{} target values for N = {}",
            target.len(),
            input.n
        )));
    }
    let mut trace = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (idx, params) in family.candidates().into_iter().enumerate() {
        let objective = match curve(input, &family.model(&params), settings) {
            Ok(xi) => mean_sq_dev(&xi, target),
            Err(_) => f64::INFINITY,
        };
        if objective.is_finite() && best.is_none_or(|(_, b)| objective < b) {
            best = Some((idx, objective));
        }
        trace.push((params, objective));
    }
    let (idx, objective) = best.ok_or(Error::FitFailed {
        family: family.name(),
    })?;
    Ok(FitResult {
        best: family.model(&trace[idx].0),
        objective,
        evaluations: trace.len(),
        trace,
    })
}

fn curve(
    input: &ShrinkInput,
    model: &FittedModel,
    settings: &TransformSettings,
) -> Result<Vec<f64>> {
    match model.method() {
        ShrinkMethod::Correlated(auto) => {
            shrink_correlated(input, &TransformContext::with_settings(auto, settings)?)
        }
        ShrinkMethod::EffectiveLp { tau_eff } => shrink_lp_effective(input, tau_eff),
        _ => unreachable!("fitted models map to correlated or effective estimators"),
    }
}

fn mean_sq_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn sorted(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// `lo, lo + step, ..` up to `hi`, rounded to absorb accumulation error.
pub fn step_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| ((lo + step * k as f64) * 1e9).round() / 1e9)
        .collect()
}
