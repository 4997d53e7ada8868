//! psi, chi and S transforms of the autocorrelation matrix `A`.
//!
//! For a Toeplitz `A` with spectral density `H(w)` (normalized to unit mean)
//! the large-`T` eigenvalue law of `A` is the law of `H(w)` under uniform `w`,
//! so
//!
//! ```text
//! psi(z) = E_w[ z H / (1 - z H) ],    chi = psi^{-1},    S(u) = (1 + u) chi(u) / u.
//! ```
//!
//! `psi` is computed by the periodic trapezoid rule along a path shifted off
//! the real `w` axis, which keeps it accurate up to and on the cut
//! `[1/max H, 1/min H]`. Starting from `quadrature_points` nodes, the grid is
//! doubled until two successive levels agree. `chi` is closed-form for the identity and
//! exponential-decay models and found by damped complex Newton iteration
//! otherwise, with continuation along `s u` (`s` from 0 to 1) when a direct
//! solve fails.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::AutoModel;

pub const DEFAULT_QUADRATURE_POINTS: usize = 1 << 14;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-11;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 100;

/// `|1 - z H(w)|` below this at any node is treated as hitting a pole.
pub const POLE_TOL: f64 = 1e-13;

/// Roots with `Im x` below this fraction of `|x|` are treated as lying on
/// the cut.
const BOUNDARY_ROOT_TOL: f64 = 1e-12;
/// Relative offset, and number of steps back, used to pick a side at a cut.
const SIDE_OFFSET: f64 = 1e-3;
const SIDE_STEPS: usize = 4;

/// Successive quadrature levels must agree to this relative tolerance.
const QUADRATURE_TOL: f64 = 1e-9;
/// Node sets beyond the base grid; the finest grid has `base * 2^MAX_REFINEMENTS` nodes.
const MAX_REFINEMENTS: usize = 8;

type C64 = Complex64;

/// Numerical settings for [`TransformContext`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSettings {
    /// Base trapezoid grid size, a power of two `>= 1024`.
    pub quadrature_points: usize,
    /// Newton stops once `|psi(x) - u|` falls below this (at most `1e-10`).
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for TransformSettings {
    fn default() -> Self {
        TransformSettings {
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
    }
}

impl TransformSettings {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_points < 1024 || !self.quadrature_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "quadrature_points must be a power of two >= 1024, got {}",
                self.quadrature_points
            )));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-10) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol must lie in (0, 1e-10], got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "newton_max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Transform evaluator for one autocorrelation model.
#[derive(Debug, Clone)]
pub struct TransformContext {
    model: AutoModel,
    quadrature_points: usize,
    newton_tol: f64,
    newton_max_iter: usize,
    quad: SymbolQuadrature,
}

impl TransformContext {
    pub fn new(model: AutoModel) -> Result<Self> {
        Self::with_settings(model, &TransformSettings::default())
    }

    pub fn with_settings(model: AutoModel, settings: &TransformSettings) -> Result<Self> {
        model.validate()?;
        settings.validate()?;
        Ok(TransformContext {
            quad: SymbolQuadrature::new(&model, settings.quadrature_points),
            model,
            quadrature_points: settings.quadrature_points,
            newton_tol: settings.newton_tol,
            newton_max_iter: settings.newton_max_iter,
        })
    }

    pub fn model(&self) -> &AutoModel {
        &self.model
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol
    }

    /// `psi_A(z)`.
    pub fn psi(&self, z: C64) -> Result<C64> {
        Ok(self.psi_with_derivative(z)?.0)
    }

    /// `psi_A(z)` and `psi_A'(z)`.
    pub fn psi_with_derivative(&self, z: C64) -> Result<(C64, C64)> {
        if z == C64::new(0.0, 0.0) {
            return Ok((z, C64::new(1.0, 0.0)));
        }
        match self.model {
            AutoModel::Identity => {
                let d = C64::new(1.0, 0.0) - z;
                if d.norm() < POLE_TOL {
                    return Err(Error::Pole { z });
                }
                let inv = d.inv();
                Ok((z * inv, inv * inv))
            }
            _ => self.quad.psi(z),
        }
    }

    /// `chi_A(u)`, the functional inverse of `psi_A`.
    ///
    /// For `Im u > 0` the root with `Im chi >= 0` is returned; values in the
    /// lower half-plane follow from `chi(conj u) = conj chi(u)`.
    pub fn chi(&self, u: C64) -> Result<C64> {
        self.chi_impl(u, None)
    }

    /// As [`chi`](Self::chi), starting the Newton iteration from `seed`
    /// (typically the solution at a nearby point). Closed-form models ignore
    /// the seed.
    pub fn chi_seeded(&self, u: C64, seed: C64) -> Result<C64> {
        self.chi_impl(u, Some(seed))
    }

    fn chi_impl(&self, u: C64, seed: Option<C64>) -> Result<C64> {
        if !(u.re.is_finite() && u.im.is_finite()) {
            return Err(Error::NonFinite("chi argument"));
        }
        if u == C64::new(0.0, 0.0) {
            return Ok(u);
        }
        if u.im < 0.0 {
            return Ok(self.chi_impl(u.conj(), seed.map(|s| s.conj()))?.conj());
        }
        match &self.model {
            AutoModel::Identity => {
                let d = C64::new(1.0, 0.0) + u;
                if d.norm() < POLE_TOL {
                    return Err(Error::Pole { z: u });
                }
                // u / (1 + u) written to keep Im exact relative to Im u
                Ok(C64::new(1.0, 0.0) - d.inv())
            }
            AutoModel::ExpDecay { .. } => {
                let gamma = self.model.gamma().expect("exp-decay model");
                Ok(exp_decay_chi(gamma, u))
            }
            AutoModel::Varma { .. } => self.chi_numeric(u, seed),
        }
    }

    /// `S_A(u) = (1 + u) chi_A(u) / u`, with `S(0) = 1`.
    pub fn s_transform(&self, u: C64) -> Result<C64> {
        if u == C64::new(0.0, 0.0) {
            return Ok(C64::new(1.0, 0.0));
        }
        if (u + 1.0).norm() == 0.0 {
            return Err(Error::Domain("S-transform undefined at u = -1".into()));
        }
        Ok((C64::new(1.0, 0.0) + u) / u * self.chi(u)?)
    }

    fn chi_numeric(&self, u: C64, seed: Option<C64>) -> Result<C64> {
        let root = self.chi_root(u, seed)?;
        if u.im > 0.0 && root.im <= BOUNDARY_ROOT_TOL * root.norm() {
            return Ok(self.one_sided_root(u).unwrap_or(root));
        }
        Ok(root)
    }

    /// A root on the cut solves `psi(x + i0) = u` for `u` on a curve of
    /// boundary values, which may carry two preimages. The one returned is
    /// the limit of interior roots approached from the side of `Re u`
    /// (trying the other side if that one leaves the image of `psi`).
    fn one_sided_root(&self, u: C64) -> Option<C64> {
        let first = if u.re >= 0.0 { 1.0 } else { -1.0 };
        for side in [first, -first] {
            let offset = C64::new(side * SIDE_OFFSET * u.norm(), 0.0);
            let Ok(mut x) = self.chi_root(u + offset, None) else {
                continue;
            };
            if x.im <= BOUNDARY_ROOT_TOL * x.norm() {
                continue;
            }
            let mut ok = true;
            for k in 1..=SIDE_STEPS {
                let target = u + offset * (1.0 - k as f64 / SIDE_STEPS as f64);
                match self.newton(target, x) {
                    Ok(next) => x = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Some(x);
            }
        }
        None
    }

    fn chi_root(&self, u: C64, seed: Option<C64>) -> Result<C64> {
        let identity_seed = u / (C64::new(1.0, 0.0) + u);
        let first = seed.unwrap_or(identity_seed);
        let mut last = match self.newton(u, first) {
            Ok(x) => return Ok(x),
            Err(e) => e,
        };
        if seed.is_some() {
            match self.newton(u, identity_seed) {
                Ok(x) => return Ok(x),
                Err(e) => last = e,
            }
        }
        self.continuation(u).map_err(|_| last)
    }

    /// Damped Newton on `psi(x) = u`, with iterates projected onto the
    /// closed half-plane of `u` (roots may sit on the cut itself).
    fn newton(&self, u: C64, seed: C64) -> Result<C64> {
        let mut x = seed;
        let (mut p, mut dp) = self.psi_with_derivative(x)?;
        let mut residual = (p - u).norm();
        for _ in 0..self.newton_max_iter {
            if residual <= self.newton_tol {
                return Ok(x);
            }
            let step = (p - u) / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            let mut damping = 1.0;
            let mut accepted = false;
            while damping > 1e-12 {
                let mut cand = x - step * damping;
                damping *= 0.5;
                if u.im > 0.0 && cand.im < 0.0 {
                    cand.im = 0.0;
                }
                if let Ok((pc, dc)) = self.psi_with_derivative(cand) {
                    let rc = (pc - u).norm();
                    if rc < residual {
                        x = cand;
                        p = pc;
                        dp = dc;
                        residual = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            if !accepted {
                break;
            }
        }
        if residual <= self.newton_tol {
            Ok(x)
        } else {
            Err(Error::Inversion { u, residual })
        }
    }

    /// Tracks the root along `s u`, `s` from 0 to 1, halving the step on
    /// failure.
    fn continuation(&self, u: C64) -> Result<C64> {
        let mut s: f64 = 0.0;
        let mut x = C64::new(0.0, 0.0);
        let mut ds: f64 = 0.125;
        let mut residual = f64::INFINITY;
        while s < 1.0 {
            let s_next = (s + ds).min(1.0);
            let target = u * s_next;
            let seed = if s == 0.0 {
                target / (C64::new(1.0, 0.0) + target)
            } else {
                x
            };
            match self.newton(target, seed) {
                Ok(root) => {
                    x = root;
                    s = s_next;
                    ds = (ds * 2.0).min(0.25);
                }
                Err(Error::Inversion { residual: r, .. }) => {
                    residual = r;
                    ds *= 0.5;
                }
                Err(_) => ds *= 0.5,
            }
            if ds < 1e-7 {
                return Err(Error::Inversion { u, residual });
            }
        }
        Ok(x)
    }
}

/// Closed-form chi of the exponential-decay model,
/// `1 / (gamma + sqrt(gamma^2 - 1 + 1/u^2))`, `gamma = coth(1/tau)`.
///
/// Both square-root branches are formed and the one in the upper half-plane
/// is kept (for `Im u > 0`); otherwise the root nearer the small-`u`
/// asymptote `u / (1 + u)` wins.
pub fn exp_decay_chi(gamma: f64, u: C64) -> C64 {
    let root = (C64::new(gamma * gamma - 1.0, 0.0) + (u * u).inv()).sqrt();
    let plus = (gamma + root).inv();
    let minus = (gamma - root).inv();
    if u.im > 0.0 {
        match (plus.im >= 0.0, minus.im >= 0.0) {
            (true, false) => return plus,
            (false, true) => return minus,
            _ => {}
        }
    }
    let asymptote = u / (C64::new(1.0, 0.0) + u);
    if (plus - asymptote).norm() <= (minus - asymptote).norm() {
        plus
    } else {
        minus
    }
}

/// Even trigonometric polynomial `c_0 + 2 sum_d c_d cos(d w)`.
#[derive(Debug, Clone)]
struct CosineSeries(Vec<f64>);

impl CosineSeries {
    /// `|sum_j a_j e^{-i j w}|^2` as a cosine series.
    fn power_of(coeffs: &[f64]) -> Self {
        CosineSeries(
            (0..coeffs.len())
                .map(|d| {
                    (0..coeffs.len() - d)
                        .map(|j| coeffs[j] * coeffs[j + d])
                        .sum()
                })
                .collect(),
        )
    }

    /// Value and first two derivatives at a complex argument.
    fn eval(&self, w: C64) -> (C64, C64, C64) {
        let mut v = C64::new(self.0[0], 0.0);
        let mut d1 = C64::new(0.0, 0.0);
        let mut d2 = C64::new(0.0, 0.0);
        for (d, &c) in self.0.iter().enumerate().skip(1) {
            let k = d as f64;
            let (cos, sin) = ((w * k).cos(), (w * k).sin());
            v += 2.0 * c * cos;
            d1 -= 2.0 * c * k * sin;
            d2 -= 2.0 * c * k * k * cos;
        }
        (v, d1, d2)
    }
}

/// `H = P / Q` with its first two derivatives.
fn ratio(num: &CosineSeries, den: &CosineSeries, w: C64) -> (C64, C64, C64) {
    let (p, p1, p2) = num.eval(w);
    let (q, q1, q2) = den.eval(w);
    let h = p / q;
    let h1 = (p1 - h * q1) / q;
    let h2 = (p2 - h * q2 - 2.0 * h1 * q1) / q;
    (h, h1, h2)
}

/// Largest contour offset tried, in radians of `w`.
const MAX_CONTOUR_SHIFT: f64 = 0.1;
const CONTOUR_HALVINGS: usize = 12;

/// Trapezoid rule for `E_w[f(H(w))]` over the even, `2 pi`-periodic
/// normalized symbol.
///
/// The integration path is `w + i kappa H'(w)` rather than the real axis.
/// For `Im z >= 0` every root of `1 = z H` near the real axis lies on the
/// side opposite to `H'`, so the shifted path keeps a fixed distance from
/// them and the rule stays accurate up to and on the cut
/// `[1/max H, 1/min H]`, where it returns the boundary value from above.
/// `kappa` is halved until `Im H >= 0` holds between the axis and the path,
/// which guarantees no root is crossed.
///
/// Node set 0 is the `base/2`-point grid folded by symmetry; set `k >= 1`
/// holds the odd nodes of the `base * 2^(k-1)`-point grid. The union of sets
/// `0..=k` is the full `base * 2^(k-1)` grid.
#[derive(Debug, Clone)]
struct SymbolQuadrature {
    num: CosineSeries,
    den: CosineSeries,
    base: usize,
    /// `(mean of H on the base grid, kappa)`.
    contour: OnceLock<(f64, f64)>,
    sets: Vec<OnceLock<NodeSet>>,
}

#[derive(Debug, Clone)]
struct NodeSet {
    /// Normalized symbol on the path.
    symbol: Vec<C64>,
    /// Trapezoid weight times the path derivative.
    weight: Vec<C64>,
}

impl SymbolQuadrature {
    fn new(model: &AutoModel, base: usize) -> Self {
        let (num, den) = match model {
            AutoModel::Identity => (CosineSeries(vec![1.0]), CosineSeries(vec![1.0])),
            AutoModel::ExpDecay { tau } => {
                let b = (-1.0 / tau).exp();
                (
                    CosineSeries(vec![1.0 - b * b]),
                    CosineSeries::power_of(&[1.0, -b]),
                )
            }
            AutoModel::Varma { ar, ma } => {
                let poly: Vec<f64> = std::iter::once(1.0).chain(ar.iter().map(|a| -a)).collect();
                (CosineSeries::power_of(ma), CosineSeries::power_of(&poly))
            }
        };
        SymbolQuadrature {
            num,
            den,
            base,
            contour: OnceLock::new(),
            sets: (0..=MAX_REFINEMENTS + 1).map(|_| OnceLock::new()).collect(),
        }
    }

    fn real_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.base;
        (0..=m / 2).map(move |j| 2.0 * PI * j as f64 / m as f64)
    }

    fn contour(&self) -> (f64, f64) {
        *self.contour.get_or_init(|| {
            let m = self.base;
            let norm = (0..m)
                .map(|j| {
                    let w = C64::new(2.0 * PI * j as f64 / m as f64, 0.0);
                    ratio(&self.num, &self.den, w).0.re
                })
                .sum::<f64>()
                / m as f64;
            let slopes: Vec<(f64, f64)> = self
                .real_nodes()
                .map(|w| (w, ratio(&self.num, &self.den, C64::new(w, 0.0)).1.re))
                .collect();
            let steepest = slopes.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max);
            if steepest == 0.0 {
                return (norm, 0.0);
            }
            let mut kappa = MAX_CONTOUR_SHIFT / steepest;
            for _ in 0..CONTOUR_HALVINGS {
                let clear = slopes.iter().all(|&(w, s)| {
                    [0.25, 0.5, 0.75, 1.0].iter().all(|t| {
                        let h = ratio(&self.num, &self.den, C64::new(w, t * kappa * s)).0;
                        h.im >= -1e-12 * h.norm()
                    })
                });
                if clear {
                    return (norm, kappa);
                }
                kappa *= 0.5;
            }
            (norm, 0.0)
        })
    }

    /// Path nodes `w + i kappa H'(w)` with weights `weight * (1 + i kappa H''(w))`.
    fn node(&self, omega: f64, weight: f64) -> (C64, C64) {
        let (norm, kappa) = self.contour();
        let (_, h1, h2) = ratio(&self.num, &self.den, C64::new(omega, 0.0));
        let w = C64::new(omega, kappa * h1.re);
        let h = ratio(&self.num, &self.den, w).0 / norm;
        (h, C64::new(weight, weight * kappa * h2.re))
    }

    fn set(&self, k: usize) -> &NodeSet {
        self.sets[k].get_or_init(|| {
            let (symbol, weight) = if k == 0 {
                let m = self.base / 2;
                let half = m / 2;
                (0..=half)
                    .map(|j| {
                        let weight = if j == 0 || j == half { 1.0 } else { 2.0 };
                        self.node(2.0 * PI * j as f64 / m as f64, weight)
                    })
                    .unzip()
            } else {
                let g = self.base << (k - 1);
                (0..g / 4)
                    .map(|i| self.node(2.0 * PI * (2 * i + 1) as f64 / g as f64, 2.0))
                    .unzip()
            };
            NodeSet { symbol, weight }
        })
    }

    /// Weighted sums of `zH/(1 - zH)` and `H/(1 - zH)^2` over node set `k`.
    fn partial(&self, z: C64, k: usize) -> Result<(C64, C64)> {
        let set = self.set(k);
        let mut f = C64::new(0.0, 0.0);
        let mut df = C64::new(0.0, 0.0);
        for (&h, &w) in set.symbol.iter().zip(&set.weight) {
            let zh = z * h;
            let d = C64::new(1.0, 0.0) - zh;
            let d2 = d.norm_sqr();
            if d2 < POLE_TOL * POLE_TOL {
                return Err(Error::Pole { z });
            }
            let inv = d.conj() / d2;
            f += w * zh * inv;
            df += w * h * inv * inv;
        }
        Ok((f, df))
    }

    /// `psi` and `psi'`; the lower half-plane follows by conjugation.
    fn psi(&self, z: C64) -> Result<(C64, C64)> {
        if z.im < 0.0 {
            let (p, dp) = self.psi(z.conj())?;
            return Ok((p.conj(), dp.conj()));
        }
        let (mut f, mut df) = self.partial(z, 0)?;
        let mut count = (self.base / 2) as f64;
        let mut prev = f / count;
        for k in 1..=MAX_REFINEMENTS + 1 {
            let (pf, pdf) = self.partial(z, k)?;
            f += pf;
            df += pdf;
            count *= 2.0;
            let psi = f / count;
            if (psi - prev).norm() <= QUADRATURE_TOL * psi.norm().max(1.0) {
                return Ok((psi, df / count));
            }
            prev = psi;
        }
        Err(Error::Pole { z })
    }
}
