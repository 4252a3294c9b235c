//! Concrete risk measures on both sides of the monetary/geometric
//! correspondence.
//!
//! Monetary-side measures act on arbitrary positions (`Z` in cash units or
//! log-returns); geometric-side measures act on strictly positive positions
//! (`X = exp Z`, gross returns). The two families line up pairwise:
//!
//! | monetary side                            | geometric side                    |
//! |------------------------------------------|-----------------------------------|
//! | quantile / value-at-risk                 | quantile of the gross return      |
//! | average value-at-risk [`avar`]           | geometric tail average [`arar`]   |
//! | exponential mean [`exp_mean`]            | power mean [`pnorm`]              |
//! | worst-case penalized mean                | [`logconvex_eval`]                |
//! | certainty equivalent                     | [`mean_value_ce`]                 |
//! | `E_Q[Z]`                                 | geometric mean [`h0_premium`]     |
//!
//! The geometric mean `H_0` is the special case of the Orlicz premium
//! [`orlicz_premium`] with shape `phi(x) = 1 + log x`, and that identity is
//! used as the independent bisection route for cross-checking the closed
//! form ([`h0_premium_via_infimum`]).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::correspondence::{RiskFunctional, Side};
use crate::prob::{
    expect, quantile, sorted_with_cum, Position, PositivePosition, ProbSpace, Scenario,
    ScenarioSet,
};
use crate::{Error, Result};

/// Relative tolerance for the multiplicative bisection in premium
/// root-finding. Kept near machine precision so that bisection branch
/// noise stays below the 1e-12 exp/log round-trip budget of the
/// correspondence (a one-ulp input perturbation can move the result by a
/// full final-bracket width).
pub const BISECTION_REL_TOL: f64 = 1e-14;

/// Absolute tolerance for inverting the certainty-equivalent transform;
/// near machine precision for the same round-trip reason as
/// [`BISECTION_REL_TOL`].
pub const ELL_INVERSE_TOL: f64 = 1e-15;

/// Initial bracket stretch for premium bisection; widened once by the same
/// factor before giving up.
const BRACKET_SCALE: f64 = 1e6;

// ---------------------------------------------------------------------------
// Orlicz premia
// ---------------------------------------------------------------------------

/// Shape function for Orlicz premia: nondecreasing with
/// `phi(0) < 1 < phi(inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrliczShape {
    /// `phi(x) = x^p`, `p > 0`.
    Power { p: f64 },
    /// `phi(x) = x`.
    Linear,
    /// `phi(x) = 1 + log x`; yields the geometric mean as premium.
    CanonicalLog,
    /// Sorted `[x, phi(x)]` pairs, linearly interpolated and linearly
    /// extrapolated with the boundary slopes.
    Table { points: Vec<(f64, f64)> },
}

/// An Orlicz shape together with a confidence level `alpha`: the premium is
/// the smallest `k > 0` with `E[phi(X/k)] <= 1 - alpha`.
///
/// The premium is normalized (`H[1] = 1`) exactly when `phi(1) = 1 - alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrliczFunction {
    pub shape: OrliczShape,
    #[serde(default)]
    pub level_alpha: f64,
}

impl OrliczFunction {
    pub fn new(shape: OrliczShape, level_alpha: f64) -> Result<Self> {
        let f = OrliczFunction { shape, level_alpha };
        f.validate()?;
        Ok(f)
    }

    /// Checks the level, table monotonicity, and the growth condition
    /// `phi(0) < 1 < phi(inf)` (the latter probed at two points for tables).
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.level_alpha) {
            return Err(Error::InvalidParameter(format!(
                "orlicz level alpha must lie in [0, 1), got {}",
                self.level_alpha
            )));
        }
        match &self.shape {
            OrliczShape::Power { p } => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "power shape needs p > 0, got {p}"
                    )));
                }
            }
            OrliczShape::Linear | OrliczShape::CanonicalLog => {}
            OrliczShape::Table { points } => {
                validate_table(points, "orlicz shape table")?;
                if points.first().map(|p| p.0) < Some(0.0) {
                    return Err(Error::InvalidParameter(
                        "orlicz shape table must start at x >= 0".into(),
                    ));
                }
                let far = points.last().expect("validated nonempty").0.max(1.0) * BRACKET_SCALE;
                let (at0, atfar) = (self.phi(0.0), self.phi(far));
                if !(at0 < 1.0 && 1.0 < atfar) {
                    return Err(Error::InvalidParameter(format!(
                        "orlicz shape must satisfy phi(0) < 1 < phi(inf); \
                         probes gave phi(0) = {at0}, phi({far:.1e}) = {atfar}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the shape at `x >= 0`. `CanonicalLog` returns `-inf` at 0.
    pub fn phi(&self, x: f64) -> f64 {
        match &self.shape {
            OrliczShape::Power { p } => x.powf(*p),
            OrliczShape::Linear => x,
            OrliczShape::CanonicalLog => 1.0 + x.ln(),
            OrliczShape::Table { points } => interp_linear(points, x),
        }
    }
}

/// Piecewise-linear interpolation through sorted `(x, y)` points, linearly
/// extrapolated beyond the ends using the boundary segment slopes (or flat
/// for a single point).
pub(crate) fn interp_linear(points: &[(f64, f64)], x: f64) -> f64 {
    debug_assert!(!points.is_empty());
    if points.len() == 1 {
        return points[0].1;
    }
    let seg = match points.binary_search_by(|p| p.0.partial_cmp(&x).expect("finite table")) {
        Ok(i) => return points[i].1,
        Err(0) => &points[0..2],
        Err(i) if i >= points.len() => &points[points.len() - 2..],
        Err(i) => &points[i - 1..=i],
    };
    let (x0, y0) = seg[0];
    let (x1, y1) = seg[1];
    y0 + (y1 - y0) / (x1 - x0) * (x - x0)
}

pub(crate) fn validate_table(points: &[(f64, f64)], what: &str) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!("{what} needs at least two points")));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::InvalidParameter(format!(
                "{what} abscissae must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::InvalidParameter(format!(
                "{what} ordinates must be nondecreasing ({} then {})",
                w[0].1, w[1].1
            )));
        }
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} contains non-finite entries")));
    }
    Ok(())
}

/// Root-finds `sum_i w_i phi(v_i / k) = level` over `k > 0` by multiplicative
/// bisection. Weights must be a probability vector; values nonnegative with
/// at least one positive entry handled by the caller.
fn orlicz_root(values: &[f64], weights: &[f64], phi: &OrliczFunction, level: f64) -> Result<f64> {
    let g = |k: f64| -> f64 {
        values
            .iter()
            .zip(weights)
            .map(|(v, w)| if *w > 0.0 { w * phi.phi(v / k) } else { 0.0 })
            .sum::<f64>()
            - level
    };
    let mut minpos = f64::INFINITY;
    let mut vmax = 0.0_f64;
    for (v, w) in values.iter().zip(weights) {
        if *w > 0.0 && *v > 0.0 {
            minpos = minpos.min(*v);
            vmax = vmax.max(*v);
        }
    }
    if vmax == 0.0 {
        // The position is zero wherever the scenario charges mass; any k > 0
        // satisfies E[phi(0)] <= level iff phi(0) <= level, and the infimum
        // over k is 0 in that case.
        return if phi.phi(0.0) <= level {
            Ok(0.0)
        } else {
            Err(Error::BracketingFailed(format!(
                "position vanishes under the scenario but phi(0) = {} exceeds level {level}",
                phi.phi(0.0)
            )))
        };
    }
    let mut lo = minpos / BRACKET_SCALE;
    let mut hi = vmax * BRACKET_SCALE;
    let mut widened = false;
    loop {
        if g(lo) > 0.0 && g(hi) <= 0.0 {
            break;
        }
        if widened {
            return Err(Error::BracketingFailed(format!(
                "no sign change of E[phi(X/k)] - {level} on [{lo:.3e}, {hi:.3e}] \
                 even after widening; shape violates the growth assumptions"
            )));
        }
        lo /= BRACKET_SCALE;
        hi *= BRACKET_SCALE;
        widened = true;
    }
    let mut iters = 0;
    while hi / lo - 1.0 > BISECTION_REL_TOL && iters < 200 {
        let mid = (lo * hi).sqrt();
        if g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    Ok((lo * hi).sqrt())
}

/// Orlicz premium `inf { k > 0 : E[phi(X/k)] <= 1 - alpha }` under the
/// reference measure.
///
/// # Errors
///
/// Propagates shape validation failures, and reports a bracketing failure if
/// no root exists inside the (once-widened) bracket — e.g. a table shape
/// with `phi(0) >= 1 - alpha`.
pub fn orlicz_premium(x: &PositivePosition, phi: &OrliczFunction) -> Result<f64> {
    phi.validate()?;
    orlicz_root(x.values(), x.space().probs(), phi, 1.0 - phi.level_alpha)
}

/// Geometric mean `exp(E_Q[log X])` — closed form.
pub fn h0_premium(x: &PositivePosition, q: &Scenario) -> Result<f64> {
    Ok(expect(&x.ln(), q)?.exp())
}

/// Geometric mean via its infimum definition
/// `inf { k > 0 : E_Q[log(X/k)] <= 0 }`, solved by the Orlicz bisection
/// engine with the shape `phi(x) = 1 + log x` at level zero.
///
/// Exists as an independent route for cross-checking [`h0_premium`]; the two
/// must agree to within the bisection tolerance.
pub fn h0_premium_via_infimum(x: &PositivePosition, q: &Scenario) -> Result<f64> {
    crate::prob::require_same_space(x.space(), q.space(), "geometric mean")?;
    let weights: Vec<f64> =
        x.space().probs().iter().zip(q.density()).map(|(p, d)| p * d).collect();
    let phi = OrliczFunction { shape: OrliczShape::CanonicalLog, level_alpha: 0.0 };
    orlicz_root(x.values(), &weights, &phi, 1.0)
}

// ---------------------------------------------------------------------------
// Quantile-based measures
// ---------------------------------------------------------------------------

/// Value-at-risk at level `alpha`: the smallest `alpha`-quantile. Works on
/// either side of the correspondence (quantiles commute with `exp`).
pub fn var(x: &Position, alpha: f64) -> Result<f64> {
    crate::prob::quantile(x, alpha)
}

/// Average value-at-risk `(1/(1-alpha)) * ∫_alpha^1 quantile(x, b) db`,
/// evaluated exactly on the piecewise-constant quantile function.
///
/// `alpha = 0` is allowed and gives the plain expectation.
pub fn avar(x: &Position, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "avar level must lie in [0, 1), got {alpha}"
        )));
    }
    let sorted = sorted_with_cum(x.values(), x.space().probs());
    let mut integral = 0.0;
    let mut left = 0.0_f64;
    for (v, cum) in sorted {
        let seg = cum.min(1.0).max(alpha) - left.max(alpha);
        if seg > 0.0 {
            integral += seg * v;
        }
        left = cum;
    }
    Ok(integral / (1.0 - alpha))
}

/// Geometric tail average: the return-side counterpart of [`avar`],
/// `exp(avar(log X, alpha))`.
pub fn arar(x: &PositivePosition, alpha: f64) -> Result<f64> {
    Ok(avar(&x.ln(), alpha)?.exp())
}

/// The same tail average by the direct geometric route: the product of the
/// upper-tail quantile values raised to their segment lengths, rescaled by
/// `1/(1-alpha)`. Kept as an independent cross-check for [`arar`]; the two
/// agree to within `1e-10`.
pub fn arar_geometric(x: &PositivePosition, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "arar level must lie in [0, 1), got {alpha}"
        )));
    }
    let sorted = sorted_with_cum(x.values(), x.space().probs());
    let mut product = 1.0;
    let mut left = 0.0_f64;
    for (v, cum) in sorted {
        let seg = cum.min(1.0).max(alpha) - left.max(alpha);
        if seg > 0.0 {
            product *= v.powf(seg / (1.0 - alpha));
        }
        left = cum;
    }
    Ok(product)
}

// ---------------------------------------------------------------------------
// Power means and robust variants
// ---------------------------------------------------------------------------

/// Exponential mean `(1/gamma) * log E_P[exp(gamma Z)]`, the monetary-side
/// counterpart of the power mean. Computed with a max-shift for overflow
/// safety. Requires `gamma != 0`.
pub fn exp_mean(z: &Position, gamma: f64) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("exp_mean needs finite gamma != 0, got {gamma}")));
    }
    let m = z
        .values()
        .iter()
        .map(|v| gamma * v)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z
        .values()
        .iter()
        .zip(z.space().probs())
        .map(|(v, p)| p * (gamma * v - m).exp())
        .sum();
    Ok((sum.ln() + m) / gamma)
}

/// Power mean `(E_P[X^gamma])^(1/gamma)`, `gamma != 0`. Implemented as the
/// exponential image of [`exp_mean`] on log-returns so the two sides of the
/// correspondence share one numerical path.
pub fn pnorm(x: &PositivePosition, gamma: f64) -> Result<f64> {
    Ok(exp_mean(&x.ln(), gamma)?.exp())
}

/// Worst-case power mean `max_Q (E_Q[X^gamma])^(1/gamma)` over a scenario
/// set.
pub fn robust_pnorm(x: &PositivePosition, gamma: f64, qs: &ScenarioSet) -> Result<f64> {
    robust_discounted_pnorm(x, gamma, qs, &vec![0.0; qs.len()])
}

/// Discounted worst-case power mean
/// `max_Q exp(-c(Q)) * (E_Q[X^gamma])^(1/gamma)` with per-scenario penalties
/// `c(Q) >= 0`.
pub fn robust_discounted_pnorm(
    x: &PositivePosition,
    gamma: f64,
    qs: &ScenarioSet,
    penalties: &[f64],
) -> Result<f64> {
    crate::prob::require_same_space(x.space(), qs.space(), "discounted power mean")?;
    check_penalties(penalties, qs.len())?;
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power mean needs finite gamma != 0, got {gamma}"
        )));
    }
    let lx = x.ln();
    let mut best = f64::NEG_INFINITY;
    for (q, c) in qs.iter().zip(penalties) {
        // log of e^{-c} (E_Q[e^{gamma log X}])^{1/gamma}, with a max-shift.
        let m = lx
            .values()
            .iter()
            .zip(q.density())
            .filter(|(_, d)| **d > 0.0)
            .map(|(v, _)| gamma * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = lx
            .values()
            .iter()
            .zip(q.density())
            .zip(x.space().probs())
            .map(|((v, d), p)| if *d > 0.0 { p * d * (gamma * v - m).exp() } else { 0.0 })
            .sum();
        best = best.max((sum.ln() + m) / gamma - c);
    }
    Ok(best.exp())
}

pub(crate) fn check_penalties(penalties: &[f64], n: usize) -> Result<()> {
    if penalties.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} penalties for {} scenarios",
            penalties.len(),
            n
        )));
    }
    if let Some(c) = penalties.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "penalties must be finite and nonnegative, got {c}"
        )));
    }
    Ok(())
}

/// Penalized worst-case geometric mean
/// `max_Q exp(-c(Q)) * exp(E_Q[log X])`. With zero penalties and a singleton
/// reference scenario this is exactly [`h0_premium`].
pub fn logconvex_eval(x: &PositivePosition, qs: &ScenarioSet, penalties: &[f64]) -> Result<f64> {
    crate::prob::require_same_space(x.space(), qs.space(), "penalized geometric mean")?;
    check_penalties(penalties, qs.len())?;
    let lx = x.ln();
    let mut best = f64::NEG_INFINITY;
    for (q, c) in qs.iter().zip(penalties) {
        best = best.max(expect(&lx, q)? - c);
    }
    Ok(best.exp())
}

// ---------------------------------------------------------------------------
// Certainty equivalents
// ---------------------------------------------------------------------------

/// Strictly increasing convex loss transform with `ell(0) = 0`, used by the
/// certainty-equivalent measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossTransform {
    /// `ell(x) = x`.
    Identity,
    /// `ell(x) = x` for `x < 0`, `x^2 + x` for `x >= 0` — kinked convex
    /// growth on gains.
    PiecewiseQuadratic,
    /// Sorted `[x, ell(x)]` pairs, linearly interpolated/extrapolated.
    Table { points: Vec<(f64, f64)> },
}

impl LossTransform {
    pub fn validate(&self) -> Result<()> {
        if let LossTransform::Table { points } = self {
            validate_table(points, "loss transform table")?;
            // Strict increase (invertibility) and nondecreasing slopes
            // (convexity).
            let mut prev_slope = f64::NEG_INFINITY;
            for w in points.windows(2) {
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                if slope <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "loss transform must be strictly increasing; flat or falling \
                         segment at x = {}",
                        w[0].0
                    )));
                }
                if slope < prev_slope - 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "loss transform must be convex; slope drops at x = {}",
                        w[0].0
                    )));
                }
                prev_slope = slope;
            }
            let at0 = self.apply(0.0);
            if at0.abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "loss transform must vanish at 0, got ell(0) = {at0}"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            LossTransform::Identity => x,
            LossTransform::PiecewiseQuadratic => {
                if x < 0.0 {
                    x
                } else {
                    x * x + x
                }
            }
            LossTransform::Table { points } => interp_linear(points, x),
        }
    }

    /// Inverse by expanding-bracket bisection to [`ELL_INVERSE_TOL`].
    ///
    /// Bisection is used even for the closed-form variants so user-supplied
    /// tables run through exactly the same path.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::InvalidParameter(format!("cannot invert at y = {y}")));
        }
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        let mut tries = 0;
        while self.apply(lo) > y {
            lo *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::BracketingFailed(format!("no lower bracket for ell = {y}")));
            }
        }
        while self.apply(hi) < y {
            hi *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::BracketingFailed(format!("no upper bracket for ell = {y}")));
            }
        }
        while hi - lo > ELL_INVERSE_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                // The bracket no longer splits at this float precision.
                break;
            }
            if self.apply(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Monetary certainty equivalent `max_Q ell^{-1}(E_Q[ell(Z)])`.
pub fn certainty_equivalent(z: &Position, ell: &LossTransform, qs: &ScenarioSet) -> Result<f64> {
    crate::prob::require_same_space(z.space(), qs.space(), "certainty equivalent")?;
    ell.validate()?;
    let mut best = f64::NEG_INFINITY;
    for q in qs.iter() {
        let mean = z
            .values()
            .iter()
            .zip(q.density())
            .zip(z.space().probs())
            .map(|((v, d), p)| p * d * ell.apply(*v))
            .sum::<f64>();
        best = best.max(ell.inverse(mean)?);
    }
    Ok(best)
}

/// Geometric certainty equivalent
/// `max_Q exp(ell^{-1}(E_Q[ell(log X)]))` — the mean-value premium on gross
/// returns. With `ell = Identity` this collapses to the worst-case
/// geometric mean.
pub fn mean_value_ce(x: &PositivePosition, ell: &LossTransform, qs: &ScenarioSet) -> Result<f64> {
    Ok(certainty_equivalent(&x.ln(), ell, qs)?.exp())
}

// ---------------------------------------------------------------------------
// Inf-convolution premium (experimental)
// ---------------------------------------------------------------------------

/// **Experimental.** Haezendonck–Goovaerts-style premium
/// `min_s { s + H[(X - s)^+] }` where `H` is the Orlicz premium for `phi`,
/// minimized by golden-section search over `s` in `[min X, max X]`.
///
/// Assumes a convex shape (the objective is then convex in `s`, so the
/// search is sound). Shapes with `phi(0) = -inf` (`CanonicalLog`) are
/// rejected because `(X - s)^+` has zeros.
pub fn hg_risk(x: &Position, phi: &OrliczFunction) -> Result<f64> {
    phi.validate()?;
    if matches!(phi.shape, OrliczShape::CanonicalLog) {
        return Err(Error::InvalidParameter(
            "hg_risk needs phi finite at 0; the canonical log shape diverges there".into(),
        ));
    }
    let probs = x.space().probs();
    let objective = |s: f64| -> Result<f64> {
        let excess: Vec<f64> = x.values().iter().map(|v| (v - s).max(0.0)).collect();
        Ok(s + orlicz_root(&excess, probs, phi, 1.0 - phi.level_alpha)?)
    };
    let (mut lo, mut hi) = x
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if hi - lo < 1e-15 {
        // Degenerate position: X is constant, the premium is that constant.
        return Ok(lo);
    }
    const INVPHI: f64 = 0.618_033_988_749_894_8; // (sqrt(5) - 1) / 2
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut fa = objective(a)?;
    let mut fb = objective(b)?;
    for _ in 0..120 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INVPHI * (hi - lo);
            fa = objective(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INVPHI * (hi - lo);
            fb = objective(b)?;
        }
    }
    objective(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Measure configuration
// ---------------------------------------------------------------------------

/// A measure family plus its parameters, as found in JSON configs:
/// `{"family": "...", "params": {...}, "side": "return" | "monetary"}`.
/// Scenario-dependent families (`h0`, `robust_pnorm`,
/// `robust_discounted_pnorm`, `logconvex`, `mean_value`, `dual`) take their
/// scenario set at bind time — configs carry parameters only, never
/// probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub family: MeasureFamily,
    pub side: Side,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum MeasureFamily {
    /// Level-`alpha` quantile of the position.
    Var { alpha: f64 },
    /// Average of the upper `1 - alpha` tail; `alpha = 0` is the mean.
    Avar { alpha: f64 },
    /// Geometric tail average: `exp` of the tail average of logs.
    Arar { alpha: f64 },
    /// Orlicz premium with the given shape at level `1 - level_alpha`.
    Orlicz {
        shape: OrliczShape,
        #[serde(default)]
        level_alpha: f64,
    },
    /// Geometric mean under one scenario of the bound set.
    H0 {
        #[serde(default)]
        scenario: usize,
    },
    /// Power mean of order `gamma`.
    Pnorm { gamma: f64 },
    /// Worst-case power mean over the bound scenario set.
    RobustPnorm { gamma: f64 },
    /// Worst-case power mean with per-scenario multiplicative discounts.
    RobustDiscountedPnorm { gamma: f64, penalties: Vec<f64> },
    /// Worst-case penalized geometric mean.
    Logconvex { penalties: Vec<f64> },
    /// Geometric certainty equivalent under a loss transform.
    MeanValue { transform: LossTransform },
    /// Scenario-dual measure with an explicit scenario-mean transform.
    Dual { r: crate::duality::RFunctionalSpec },
}

impl MeasureFamily {
    /// Does this family need a scenario set at bind time?
    pub fn needs_scenarios(&self) -> bool {
        matches!(
            self,
            MeasureFamily::H0 { .. }
                | MeasureFamily::RobustPnorm { .. }
                | MeasureFamily::RobustDiscountedPnorm { .. }
                | MeasureFamily::Logconvex { .. }
                | MeasureFamily::MeanValue { .. }
                | MeasureFamily::Dual { .. }
        )
    }

    fn label(&self) -> String {
        match self {
            MeasureFamily::Var { alpha } => format!("var({alpha})"),
            MeasureFamily::Avar { alpha } => format!("avar({alpha})"),
            MeasureFamily::Arar { alpha } => format!("arar({alpha})"),
            MeasureFamily::Orlicz { shape, level_alpha } => {
                let s = match shape {
                    OrliczShape::Power { p } => format!("power {p}"),
                    OrliczShape::Linear => "linear".into(),
                    OrliczShape::CanonicalLog => "canonical log".into(),
                    OrliczShape::Table { .. } => "table".into(),
                };
                format!("orlicz({s}, alpha={level_alpha})")
            }
            MeasureFamily::H0 { scenario } => format!("h0(scenario {scenario})"),
            MeasureFamily::Pnorm { gamma } => format!("pnorm({gamma})"),
            MeasureFamily::RobustPnorm { gamma } => format!("robust_pnorm({gamma})"),
            MeasureFamily::RobustDiscountedPnorm { gamma, .. } => {
                format!("robust_discounted_pnorm({gamma})")
            }
            MeasureFamily::Logconvex { .. } => "logconvex".into(),
            MeasureFamily::MeanValue { transform } => {
                let t = match transform {
                    LossTransform::Identity => "identity",
                    LossTransform::PiecewiseQuadratic => "piecewise quadratic",
                    LossTransform::Table { .. } => "table",
                };
                format!("mean_value({t})")
            }
            MeasureFamily::Dual { .. } => "dual".into(),
        }
    }
}

impl MeasureSpec {
    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    /// Binds the configured measure to a probability space (and scenario
    /// set, for the
    /// families that use one), yielding an evaluatable functional on the
    /// requested side. Families whose native arithmetic lives on one side
    /// are exposed on the other through the exp/log correspondence.
    pub fn bind(
        &self,
        space: &Arc<ProbSpace>,
        qs: Option<&ScenarioSet>,
    ) -> Result<RiskFunctional> {
        if self.family.needs_scenarios() && qs.is_none() {
            return Err(Error::InvalidParameter(format!(
                "family {} requires scenario densities (d columns in the scenario file)",
                self.family.label()
            )));
        }
        if let Some(qs) = qs {
            crate::prob::require_same_space(space, qs.space(), "measure binding")?;
        }
        let label = self.family.label();
        let geometric: RiskFunctional = match &self.family {
            MeasureFamily::Var { alpha } => {
                let (sp, a) = (space.clone(), *alpha);
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "quantile level must lie in (0, 1), got {a}"
                    )));
                }
                RiskFunctional::geometric(sp, label, move |x: &Position| quantile(x, a))
            }
            MeasureFamily::Avar { alpha } | MeasureFamily::Arar { alpha } => {
                let (sp, a) = (space.clone(), *alpha);
                if !(0.0..1.0).contains(&a) {
                    return Err(Error::InvalidParameter(format!(
                        "tail level must lie in [0, 1), got {a}"
                    )));
                }
                RiskFunctional::geometric(sp, label, move |x: &Position| {
                    arar(&as_positive(x)?, a)
                })
            }
            MeasureFamily::Orlicz { shape, level_alpha } => {
                let phi = OrliczFunction::new(shape.clone(), *level_alpha)?;
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    orlicz_premium(&as_positive(x)?, &phi)
                })
            }
            MeasureFamily::H0 { scenario } => {
                let qs = qs.expect("checked above");
                if *scenario >= qs.len() {
                    return Err(Error::InvalidParameter(format!(
                        "scenario index {scenario} out of range for {} scenarios",
                        qs.len()
                    )));
                }
                let q = qs.get(*scenario).clone();
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    h0_premium(&as_positive(x)?, &q)
                })
            }
            MeasureFamily::Pnorm { gamma } => {
                let g = *gamma;
                if g == 0.0 || !g.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power mean needs finite gamma != 0, got {g}"
                    )));
                }
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    pnorm(&as_positive(x)?, g)
                })
            }
            MeasureFamily::RobustPnorm { gamma } => {
                let g = *gamma;
                if g == 0.0 || !g.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power mean needs finite gamma != 0, got {g}"
                    )));
                }
                let qs = qs.expect("checked above").clone();
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    robust_pnorm(&as_positive(x)?, g, &qs)
                })
            }
            MeasureFamily::RobustDiscountedPnorm { gamma, penalties } => {
                let g = *gamma;
                let qs = qs.expect("checked above").clone();
                check_penalties(penalties, qs.len())?;
                let pen = penalties.clone();
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    robust_discounted_pnorm(&as_positive(x)?, g, &qs, &pen)
                })
            }
            MeasureFamily::Logconvex { penalties } => {
                let qs = qs.expect("checked above").clone();
                check_penalties(penalties, qs.len())?;
                let pen = penalties.clone();
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    logconvex_eval(&as_positive(x)?, &qs, &pen)
                })
            }
            MeasureFamily::MeanValue { transform } => {
                transform.validate()?;
                let (t, qs) = (transform.clone(), qs.expect("checked above").clone());
                RiskFunctional::geometric(space.clone(), label, move |x: &Position| {
                    mean_value_ce(&as_positive(x)?, &t, &qs)
                })
            }
            MeasureFamily::Dual { r } => {
                let dm = crate::duality::DualMeasure::new(
                    crate::duality::RFunctional::new(r.clone())?,
                    qs.expect("checked above").clone(),
                )?;
                dm.as_risk_functional(label)
            }
        };
        match self.side {
            Side::Return => Ok(geometric),
            // Quantiles and tail averages commute with exp/log, so their
            // monetary views get native arithmetic instead of the wrapper.
            Side::Monetary => match &self.family {
                MeasureFamily::Var { alpha } => {
                    let a = *alpha;
                    Ok(RiskFunctional::monetary(
                        space.clone(),
                        format!("cash({})", self.family.label()),
                        move |z: &Position| quantile(z, a),
                    ))
                }
                MeasureFamily::Avar { alpha } | MeasureFamily::Arar { alpha } => {
                    let a = *alpha;
                    Ok(RiskFunctional::monetary(
                        space.clone(),
                        format!("cash({})", self.family.label()),
                        move |z: &Position| avar(z, a),
                    ))
                }
                _ => geometric.to_monetary(),
            },
        }
    }
}

fn as_positive(x: &Position) -> Result<PositivePosition> {
    PositivePosition::with_floor(x.space().clone(), x.values().to_vec(), f64::MIN_POSITIVE)
}

/// Twenty ready-made measure specs (geometric side) covering every family,
/// parameterized by the scenario count `m` so penalty vectors fit the
/// bound set.
pub fn builtin_specs(m: usize) -> Vec<MeasureSpec> {
    let pen: Vec<f64> = (0..m).map(|i| 0.15 * i as f64).collect();
    let families = vec![
        MeasureFamily::Var { alpha: 0.9 },
        MeasureFamily::Avar { alpha: 0.0 },
        MeasureFamily::Avar { alpha: 0.25 },
        MeasureFamily::Avar { alpha: 0.75 },
        MeasureFamily::Arar { alpha: 0.1 },
        MeasureFamily::Arar { alpha: 0.5 },
        MeasureFamily::Orlicz { shape: OrliczShape::Power { p: 1.0 }, level_alpha: 0.0 },
        MeasureFamily::Orlicz { shape: OrliczShape::Power { p: 2.0 }, level_alpha: 0.0 },
        MeasureFamily::Orlicz { shape: OrliczShape::Power { p: 2.0 }, level_alpha: 0.25 },
        MeasureFamily::Orlicz { shape: OrliczShape::CanonicalLog, level_alpha: 0.0 },
        MeasureFamily::H0 { scenario: 0 },
        MeasureFamily::Pnorm { gamma: 1.0 },
        MeasureFamily::Pnorm { gamma: -1.0 },
        MeasureFamily::Pnorm { gamma: 2.5 },
        MeasureFamily::RobustPnorm { gamma: 1.5 },
        MeasureFamily::RobustDiscountedPnorm { gamma: 1.0, penalties: pen.clone() },
        MeasureFamily::Logconvex { penalties: pen },
        MeasureFamily::MeanValue { transform: LossTransform::Identity },
        MeasureFamily::MeanValue { transform: LossTransform::PiecewiseQuadratic },
        MeasureFamily::Dual { r: crate::duality::RFunctionalSpec::Coherent },
    ];
    families.into_iter().map(|family| MeasureSpec { family, side: Side::Return }).collect()
}
