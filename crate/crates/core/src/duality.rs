//! Dual (worst-case scenario) representations of geometric risk measures.
//!
//! A [`DualMeasure`] evaluates `trho(X) = max_j exp(R(E_j[log X]; j))`,
//! where `E_j` is the expectation under the j-th scenario and `R` is a
//! scenario-indexed transform of the scenario mean — an [`RFunctional`].
//! Every `R` constructible here is nondecreasing in `t` (table inputs are
//! validated for it), which makes the dual measure monotone and
//! quasi-logconvex by construction.
//!
//! The same value can be assembled from building blocks: the scenario-wise
//! geometric mean `H_j(X) = exp(E_j[log X])` composed with
//! `s -> exp(R(log s; j))`. [`DualMeasure::eval_building_block`] takes that
//! route; it differs from the direct one only by a `log(exp(t))`
//! round-trip, so the two agree to machine precision.
//!
//! [`recover_r`] inverts the representation: given any geometric measure it
//! rebuilds `R(t; Q)` as the infimum of `log trho(Y)` over positions with
//! scenario log-mean at least `t`. [`law_invariant_dual_eval`] computes the
//! law-invariant envelope by replacing each scenario mean with a
//! rearrangement-optimal (comonotone) integral, and
//! [`arar_mixture`] expresses that envelope, scenario by scenario, as a
//! geometric mixture of tail averages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::{RiskFunctional, Side};
use crate::measures::{interp_linear, validate_table, LossTransform};
use crate::prob::{
    comonotone_integral, expect, law_equivalent_sup, Position, PositivePosition, Scenario,
    ScenarioSet,
};
use crate::{rel_gap, Error, Result};

/// Resolution of the inner `q`-grid for the `supq_penalty` family.
const SUPQ_GRID: usize = 101;

/// Scenario-mean transforms, tagged for JSON configs. `t` is always the
/// scenario expectation of log-values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RFunctionalSpec {
    /// `R(t; j) = t`: the worst-case geometric mean.
    Coherent,
    /// `R(t; j) = t - penalties[j]`: a penalized worst case.
    ConvexPenalty { penalties: Vec<f64> },
    /// `R(t; j) = sup_{q in [0,1]} (q t - q^2 base_penalties[j])`,
    /// the envelope of scaled-down scenarios with quadratically growing
    /// cost. With zero base this is `max(t, 0)`.
    SupqPenalty { base_penalties: Vec<f64> },
    /// `R(t; j) = max(t, C)`: never certifies below the floor.
    Floor {
        #[serde(rename = "C")]
        floor: f64,
    },
    /// `R(t; j) = log(max(t, a))` with `a` in (0, 1); compresses large
    /// means and floors small ones.
    LogFloor { a: f64 },
    /// `R(t; j) = ell(t)` for a convex nondecreasing transform with
    /// `ell(0) = 0`.
    MeanValue { transform: LossTransform },
    /// Piecewise-linear `R` through user points, extrapolated with the
    /// boundary slopes; must be nondecreasing.
    UserTable { points: Vec<(f64, f64)> },
}

/// Whether a family satisfies a structural property. `None` means the
/// answer depends on user data and must be settled by a checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RClaims {
    /// `R(t + h) >= R(t) + h` for all `h >= 0`.
    pub expansive: Option<bool>,
    /// `R(t + h) = R(t) + h` for all `h`.
    pub translation_invariant_in_t: Option<bool>,
}

/// A validated scenario-mean transform.
#[derive(Debug, Clone, Serialize)]
pub struct RFunctional {
    spec: RFunctionalSpec,
}

impl RFunctional {
    pub fn new(spec: RFunctionalSpec) -> Result<Self> {
        match &spec {
            RFunctionalSpec::Coherent => {}
            RFunctionalSpec::ConvexPenalty { penalties } => {
                crate::measures::check_penalties(penalties, penalties.len())?;
                if penalties.is_empty() {
                    return Err(Error::InvalidParameter(
                        "convex_penalty needs at least one penalty".into(),
                    ));
                }
            }
            RFunctionalSpec::SupqPenalty { base_penalties } => {
                crate::measures::check_penalties(base_penalties, base_penalties.len())?;
                if base_penalties.is_empty() {
                    return Err(Error::InvalidParameter(
                        "supq_penalty needs at least one base penalty".into(),
                    ));
                }
            }
            RFunctionalSpec::Floor { floor } => {
                if !floor.is_finite() {
                    return Err(Error::InvalidParameter(format!("floor C must be finite, got {floor}")));
                }
            }
            RFunctionalSpec::LogFloor { a } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log_floor needs a in (0, 1), got {a}"
                    )));
                }
            }
            RFunctionalSpec::MeanValue { transform } => transform.validate()?,
            RFunctionalSpec::UserTable { points } => {
                validate_table(points, "scenario-mean transform table")?;
                if points.windows(2).any(|w| w[1].1 < w[0].1) {
                    return Err(Error::InvalidParameter(
                        "scenario-mean transform table must be nondecreasing".into(),
                    ));
                }
            }
        }
        Ok(RFunctional { spec })
    }

    pub fn spec(&self) -> &RFunctionalSpec {
        &self.spec
    }

    /// Scenario count this transform is pinned to, if any: penalty vectors
    /// index scenarios, the other families are scenario-independent.
    pub fn scenario_count(&self) -> Option<usize> {
        match &self.spec {
            RFunctionalSpec::ConvexPenalty { penalties } => Some(penalties.len()),
            RFunctionalSpec::SupqPenalty { base_penalties } => Some(base_penalties.len()),
            _ => None,
        }
    }

    /// Evaluates `R(t; scenario)`.
    pub fn eval(&self, t: f64, scenario: usize) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scenario-mean transform wants finite t, got {t}"
            )));
        }
        match &self.spec {
            RFunctionalSpec::Coherent => Ok(t),
            RFunctionalSpec::ConvexPenalty { penalties } => {
                let c = penalties.get(scenario).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "scenario index {scenario} out of range for {} penalties",
                        penalties.len()
                    ))
                })?;
                Ok(t - c)
            }
            RFunctionalSpec::SupqPenalty { base_penalties } => {
                let c = base_penalties.get(scenario).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "scenario index {scenario} out of range for {} base penalties",
                        base_penalties.len()
                    ))
                })?;
                let mut best = f64::NEG_INFINITY;
                for k in 0..SUPQ_GRID {
                    let q = k as f64 / (SUPQ_GRID - 1) as f64;
                    best = best.max(q * t - q * q * c);
                }
                Ok(best)
            }
            RFunctionalSpec::Floor { floor } => Ok(t.max(*floor)),
            RFunctionalSpec::LogFloor { a } => Ok(t.max(*a).ln()),
            RFunctionalSpec::MeanValue { transform } => Ok(transform.apply(t)),
            RFunctionalSpec::UserTable { points } => Ok(interp_linear(points, t)),
        }
    }

    /// Structural claims for the family; `None` where user data decides.
    pub fn claims(&self) -> RClaims {
        let (e, ti) = match &self.spec {
            RFunctionalSpec::Coherent | RFunctionalSpec::ConvexPenalty { .. } => {
                (Some(true), Some(true))
            }
            RFunctionalSpec::SupqPenalty { .. }
            | RFunctionalSpec::Floor { .. }
            | RFunctionalSpec::LogFloor { .. } => (Some(false), Some(false)),
            RFunctionalSpec::MeanValue { transform } => match transform {
                LossTransform::Identity => (Some(true), Some(true)),
                // Slope is 1 below zero and at least 1 above, so shifts are
                // amplified but not preserved.
                LossTransform::PiecewiseQuadratic => (Some(true), Some(false)),
                LossTransform::Table { .. } => (None, None),
            },
            RFunctionalSpec::UserTable { .. } => (None, None),
        };
        RClaims { expansive: e, translation_invariant_in_t: ti }
    }
}

// ---------------------------------------------------------------------------
// Structural checks on R
// ---------------------------------------------------------------------------

const R_CHECK_TOL: f64 = 1e-9;

fn r_check_grid() -> (Vec<f64>, Vec<f64>) {
    let ts = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    let hs = (0..21).map(|i| 0.15 * i as f64).collect();
    (ts, hs)
}

/// Verdict of the expansiveness check, in all three equivalent guises.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansiveCheck {
    pub expansive: bool,
    /// `R(t + h) >= R(t) + h` on the grid.
    pub additive_holds: bool,
    /// The composed block `B(s) = exp(R(log s))` satisfies
    /// `B(lambda s) >= lambda B(s)` for `lambda >= 1`.
    pub multiplicative_holds: bool,
    /// For `s' >= s`, `B(s') / B(s) >= s' / s`.
    pub ratio_holds: bool,
    /// The three formulations agree pointwise; they are algebraically the
    /// same statement, so disagreement indicates a numerical problem.
    pub formulations_agree: bool,
    pub worst_gap: f64,
}

/// Checks `R(t + h) >= R(t) + h` for `h >= 0` on a deterministic grid, in
/// the additive form and in the two multiplicative forms it transports to
/// (`lambda = e^h`, `s = e^t`, `s' = lambda s`, checked only for
/// `s' >= s`). Scenario-indexed families are checked for every scenario.
pub fn check_expansive(r: &RFunctional) -> Result<ExpansiveCheck> {
    let scenarios = r.scenario_count().unwrap_or(1);
    let (ts, hs) = r_check_grid();
    let (mut add, mut mult, mut ratio) = (true, true, true);
    let mut agree = true;
    let mut worst = 0.0_f64;
    for j in 0..scenarios {
        for &t in &ts {
            for &h in &hs {
                let base = r.eval(t, j)?;
                let additive_ok = {
                    let gap = rel_gap(base + h, r.eval(t + h, j)?);
                    worst = worst.max(gap);
                    gap <= R_CHECK_TOL
                };
                let (s, lambda) = (t.exp(), h.exp());
                let block = |u: f64| -> Result<f64> { Ok(r.eval(u.ln(), j)?.exp()) };
                let multiplicative_ok = {
                    let gap = rel_gap((lambda * block(s)?).ln(), block(lambda * s)?.ln());
                    worst = worst.max(gap);
                    gap <= R_CHECK_TOL
                };
                let ratio_ok = {
                    let (s2, b1, b2) = (lambda * s, block(s)?, block(lambda * s)?);
                    let gap = rel_gap((s2 / s).ln(), (b2 / b1).ln());
                    worst = worst.max(gap);
                    gap <= R_CHECK_TOL
                };
                add &= additive_ok;
                mult &= multiplicative_ok;
                ratio &= ratio_ok;
                agree &= additive_ok == multiplicative_ok && multiplicative_ok == ratio_ok;
            }
        }
    }
    Ok(ExpansiveCheck {
        expansive: add,
        additive_holds: add,
        multiplicative_holds: mult,
        ratio_holds: ratio,
        formulations_agree: agree,
        worst_gap: worst,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationCheck {
    pub holds: bool,
    pub worst_gap: f64,
}

/// Checks `R(t + h) = R(t) + h` on a grid of shifts of both signs.
pub fn check_translation_invariant_in_t(r: &RFunctional) -> Result<TranslationCheck> {
    let scenarios = r.scenario_count().unwrap_or(1);
    let (ts, hs) = r_check_grid();
    let mut worst = 0.0_f64;
    for j in 0..scenarios {
        for &t in &ts {
            for &h in &hs {
                for signed in [h, -h] {
                    let gap = rel_gap(r.eval(t, j)? + signed, r.eval(t + signed, j)?).abs();
                    worst = worst.max(gap);
                }
            }
        }
    }
    Ok(TranslationCheck { holds: worst <= R_CHECK_TOL, worst_gap: worst })
}

// ---------------------------------------------------------------------------
// The dual measure
// ---------------------------------------------------------------------------

/// A geometric risk measure in scenario-dual form.
#[derive(Debug, Clone)]
pub struct DualMeasure {
    r: RFunctional,
    qs: ScenarioSet,
}

impl DualMeasure {
    pub fn new(r: RFunctional, qs: ScenarioSet) -> Result<Self> {
        if let Some(m) = r.scenario_count() {
            if m != qs.len() {
                return Err(Error::InvalidParameter(format!(
                    "transform indexes {m} scenarios but the set has {}",
                    qs.len()
                )));
            }
        }
        Ok(DualMeasure { r, qs })
    }

    pub fn r(&self) -> &RFunctional {
        &self.r
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.qs
    }

    /// `trho(X) = max_j exp(R(E_j[log X]; j))`.
    pub fn eval(&self, x: &PositivePosition) -> Result<f64> {
        Ok(self.eval_with_scenario(x)?.0)
    }

    /// Evaluation plus the index of the attaining scenario; ties resolve
    /// to the lowest index.
    pub fn eval_with_scenario(&self, x: &PositivePosition) -> Result<(f64, usize)> {
        let lx = x.ln();
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (j, q) in self.qs.iter().enumerate() {
            let v = self.r.eval(expect(&lx, q)?, j)?;
            if v > best {
                best = v;
                arg = j;
            }
        }
        Ok((best.exp(), arg))
    }

    /// Same value assembled from the scenario-wise geometric means: each
    /// scenario contributes `exp(R(log H_j(X); j))` where `H_j` is its
    /// geometric mean, and the scenarios are combined by a maximum.
    pub fn eval_building_block(&self, x: &PositivePosition) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for (j, q) in self.qs.iter().enumerate() {
            let h = crate::measures::h0_premium(x, q)?;
            best = best.max(self.r.eval(h.ln(), j)?.exp());
        }
        Ok(best)
    }

    /// The monetary view `rho(Z) = max_j R(E_j[Z]; j)`.
    pub fn eval_monetary(&self, z: &Position) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for (j, q) in self.qs.iter().enumerate() {
            best = best.max(self.r.eval(expect(z, q)?, j)?);
        }
        Ok(best)
    }

    /// Wraps the measure as a geometric-side [`RiskFunctional`].
    pub fn as_risk_functional(&self, label: impl Into<String>) -> RiskFunctional {
        let dm = self.clone();
        RiskFunctional::geometric(self.qs.space().clone(), label, move |x: &Position| {
            let px = PositivePosition::with_floor(x.space().clone(), x.values().to_vec(), f64::MIN_POSITIVE)?;
            dm.eval(&px)
        })
    }

    /// Wraps the monetary view as a [`RiskFunctional`].
    pub fn as_monetary_functional(&self, label: impl Into<String>) -> RiskFunctional {
        let dm = self.clone();
        RiskFunctional::monetary(self.qs.space().clone(), label, move |z: &Position| {
            dm.eval_monetary(z)
        })
    }
}

// ---------------------------------------------------------------------------
// Recovering R from a measure
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RecoverConfig {
    /// Log-values are searched in the box `[-bound, bound]^n`.
    pub bound: f64,
    /// Descent restarts (the first start is the constant position).
    pub starts: usize,
    pub init_step: f64,
    pub min_step: f64,
    pub seed: u64,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig { bound: 8.0, starts: 8, init_step: 1.0, min_step: 1e-6, seed: 0x5eed }
    }
}

/// Recovers the scenario-mean transform of a geometric measure:
/// `R(t; Q) = inf { log trho(Y) : E_Q[log Y] >= t }`, minimized over
/// positions `Y = exp(u)` with `u` in a box.
///
/// The measure must be monotone (verify with
/// [`crate::correspondence::check_property`] if in doubt); for monotone
/// measures the infimum is attained on the constraint boundary, which the
/// projected coordinate descent used here exploits. Multi-start descent
/// with halving steps; the constant log-position `u = (t, ..., t)` is
/// always among the starts and is already optimal for transforms that
/// depend on the position only through the scenario mean.
///
/// # Errors
///
/// Needs a geometric-side functional, `|t| <= bound`, and a scenario on
/// the functional's space.
pub fn recover_r(
    trho: &RiskFunctional,
    t: f64,
    q: &Scenario,
    cfg: &RecoverConfig,
) -> Result<f64> {
    if trho.side() != Side::Return {
        return Err(Error::Precondition(format!(
            "recover_r works on geometric measures; {} is monetary",
            trho.label()
        )));
    }
    crate::prob::require_same_space(trho.space(), q.space(), "transform recovery")?;
    let bound = cfg.bound;
    if !(t.is_finite() && t.abs() <= bound) {
        return Err(Error::InvalidParameter(format!(
            "target mean {t} outside the search box [-{bound}, {bound}]"
        )));
    }
    let n = trho.space().len();
    let w: Vec<f64> = (0..n).map(|i| q.weight(i)).collect();
    let wnorm2: f64 = w.iter().map(|wi| wi * wi).sum();

    let objective = |u: &[f64]| -> Result<f64> {
        let x = Position::new(trho.space().clone(), u.iter().map(|v| v.exp()).collect())?;
        Ok(trho.eval(&x)?.ln())
    };
    let mean = |u: &[f64]| -> f64 { u.iter().zip(&w).map(|(ui, wi)| ui * wi).sum() };

    // Minimal-norm move onto the half-space, then clamp; if clamping broke
    // feasibility, push the heaviest coordinates to the upper wall.
    let project = |u: &mut Vec<f64>| {
        let s = mean(u);
        if s < t {
            let push = (t - s) / wnorm2;
            for (ui, wi) in u.iter_mut().zip(&w) {
                *ui += push * wi;
            }
        }
        for ui in u.iter_mut() {
            *ui = ui.clamp(-bound, bound);
        }
        if mean(u) < t - 1e-12 {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).expect("finite weights"));
            for i in order {
                if mean(u) >= t {
                    break;
                }
                let deficit = t - mean(u);
                if w[i] > 0.0 {
                    u[i] = (u[i] + deficit / w[i]).min(bound);
                }
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = f64::INFINITY;
    for start in 0..cfg.starts.max(1) {
        let mut u: Vec<f64> = if start == 0 {
            vec![t; n]
        } else {
            (0..n).map(|_| -bound + 2.0 * bound * rng.gen::<f64>()).collect()
        };
        project(&mut u);
        let mut fu = objective(&u)?;
        let mut step = cfg.init_step;
        while step >= cfg.min_step {
            let mut improved = false;
            for i in 0..n {
                for dir in [-1.0, 1.0] {
                    let mut trial = u.clone();
                    trial[i] = (trial[i] + dir * step).clamp(-bound, bound);
                    project(&mut trial);
                    let ft = objective(&trial)?;
                    if ft < fu - 1e-15 {
                        u = trial;
                        fu = ft;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.min(fu);
    }
    Ok(best)
}

/// Least-squares fit of recovered transform samples to the homogeneous form
/// `d_plus * max(t, 0) - d_minus * max(-t, 0)`.
///
/// A measure that is both quasi-convex and positively homogeneous has a
/// transform of exactly this shape, so the fit residual is a structural
/// check: it should vanish (up to recovery noise) for such measures.
#[derive(Debug, Clone, Serialize)]
pub struct PositivePartFit {
    pub d_plus: f64,
    pub d_minus: f64,
    /// Largest absolute deviation between a sample and the fitted form.
    pub max_residual: f64,
}

/// Fits `(t, R(t))` samples to `d_plus * t⁺ - d_minus * t⁻` by least
/// squares. The two coefficients decouple into through-origin regressions on
/// the positive-t and negative-t samples.
///
/// # Errors
///
/// The grids must have equal length, be finite, and contain at least one
/// strictly positive and one strictly negative `t` so both coefficients are
/// identified.
pub fn fit_positive_part_form(ts: &[f64], rs: &[f64]) -> Result<PositivePartFit> {
    if ts.len() != rs.len() || ts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need matching t/R grids with at least 2 points, got {} and {}",
            ts.len(),
            rs.len()
        )));
    }
    if ts.iter().chain(rs).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("t/R samples must be finite".into()));
    }
    let (mut num_p, mut den_p, mut num_n, mut den_n) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &r) in ts.iter().zip(rs) {
        if t > 0.0 {
            num_p += r * t;
            den_p += t * t;
        } else if t < 0.0 {
            num_n += r * t;
            den_n += t * t;
        }
    }
    if den_p == 0.0 || den_n == 0.0 {
        return Err(Error::InvalidParameter(
            "t-grid must straddle zero to identify both coefficients".into(),
        ));
    }
    let d_plus = num_p / den_p;
    let d_minus = num_n / den_n;
    let max_residual = ts
        .iter()
        .zip(rs)
        .map(|(&t, &r)| (r - (d_plus * t.max(0.0) - d_minus * (-t).max(0.0))).abs())
        .fold(0.0_f64, f64::max);
    Ok(PositivePartFit { d_plus, d_minus, max_residual })
}

// ---------------------------------------------------------------------------
// Law-invariant evaluation
// ---------------------------------------------------------------------------

/// The law-invariant envelope of a dual measure:
/// `sup { trho(Y) : Y distributed like X }`.
///
/// Because every transform here is nondecreasing in the scenario mean, the
/// supremum passes inside scenario by scenario, where it becomes the
/// comonotone (rearrangement-optimal) integral of `log X` against the
/// scenario density. On equiprobable spaces that integral is attained by
/// an actual permutation of the atoms; on general spaces it upper-bounds
/// the permutation supremum. The envelope equals `trho` itself exactly
/// when the measure is law invariant.
pub fn law_invariant_dual_eval(dm: &DualMeasure, x: &PositivePosition) -> Result<f64> {
    let lx = x.ln();
    let mut best = f64::NEG_INFINITY;
    for (j, q) in dm.scenarios().iter().enumerate() {
        let t = comonotone_integral(&lx, q)?;
        best = best.max(dm.r().eval(t, j)?);
    }
    Ok(best.exp())
}

/// Cross-check of [`law_invariant_dual_eval`] by brute force: maximizes
/// each scenario mean over explicit atom permutations. Restricted to
/// equiprobable spaces with few atoms (enumeration is factorial).
pub fn law_invariant_dual_eval_by_permutation(
    dm: &DualMeasure,
    x: &PositivePosition,
) -> Result<f64> {
    let lx = x.ln();
    let mut best = f64::NEG_INFINITY;
    for (j, q) in dm.scenarios().iter().enumerate() {
        let t = law_equivalent_sup(&lx, q)?;
        best = best.max(dm.r().eval(t, j)?);
    }
    Ok(best.exp())
}

// ---------------------------------------------------------------------------
// Tail-average mixture decomposition
// ---------------------------------------------------------------------------

/// A discrete mixture over tail levels: weight `masses[k]` at level
/// `alphas[k]`, with level 0 meaning the plain mean.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureWeights {
    pub alphas: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Decomposes a scenario's comonotone integral into tail averages.
///
/// On an equiprobable `n`-atom space with sorted density values
/// `d(1) <= ... <= d(n)`, the comonotone integral of any `z` equals
/// `sum_k m_k AVAR_{alpha_k}(z)` with `m_0 = d(1)` at level 0 and
/// `m_k = (1 - k/n)(d(k+1) - d(k))` at level `k/n`. The masses are
/// nonnegative and sum to 1 (telescoping against the density's unit mean).
///
/// # Errors
///
/// The space must be equiprobable; on general spaces the tail-average
/// representation has no aligned level grid.
pub fn arar_mixture(q: &Scenario) -> Result<MixtureWeights> {
    if !q.space().is_equiprobable() {
        return Err(Error::NotEquiprobable(
            "tail-average mixture weights need an equiprobable space".into(),
        ));
    }
    let n = q.space().len();
    let mut d = q.density().to_vec();
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite density"));
    let mut alphas = vec![0.0];
    let mut masses = vec![d[0]];
    for k in 1..n {
        alphas.push(k as f64 / n as f64);
        masses.push((1.0 - k as f64 / n as f64) * (d[k] - d[k - 1]));
    }
    Ok(MixtureWeights { alphas, masses })
}

/// Evaluates the geometric tail-average mixture of one scenario:
/// `exp( sum_k m_k AVAR_{alpha_k}(log X) )`, which reproduces
/// `exp` of that scenario's comonotone integral of `log X`.
pub fn arar_mixture_eval(x: &PositivePosition, q: &Scenario) -> Result<f64> {
    let weights = arar_mixture(q)?;
    let lx = x.ln();
    let mut acc = 0.0;
    for (alpha, m) in weights.alphas.iter().zip(&weights.masses) {
        if *m == 0.0 {
            continue;
        }
        acc += m * crate::measures::avar(&lx, *alpha)?;
    }
    Ok(acc.exp())
}
