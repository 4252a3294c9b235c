//! Portfolio wealth dynamics and risk-constrained portfolio choice.
//!
//! Wealth simulation compares three self-financing strategies on a matrix
//! of per-period gross returns: buy-and-hold, rebalancing on a substep
//! grid (each period's return split geometrically into `k` legs with a
//! rebalance after each), and the continuous-rebalancing limit, whose
//! per-period factor is the weighted geometric mean of the asset returns.
//! Power-mean comparisons order the three pathwise
//! ([`check_strategy_orderings`]), and the substep scheme converges to
//! the limit at first order in `1/k`.
//!
//! [`check_diversification_inequalities`] tests the measure-level side of
//! the same story: buy-and-hold composes terminal wealths arithmetically,
//! so quasi-convex measures reward it; continuous rebalancing composes
//! them geometrically, so quasi-logconvex measures reward that.
//!
//! Portfolio choice minimizes a geometric risk measure of the weighted
//! geometric basket `prod_i Y_i^{w_i}` over the simplex, subject to a cap
//! on the expected log return. The solver seeds a coarse simplex grid and
//! refines with pairwise mass moves on a halving step. Solutions trace an
//! efficient frontier in the cap `r`; [`check_frontier_shape`] validates
//! its monotonicity and quasi-convexity. An exactly solvable monomial
//! program ([`monomial_frontier_value`]) needs no iterative solver, and
//! [`generalized_frontier_logconstraint`] builds on it: weights range
//! over a positive box, feasibility is a log-scale constraint, and the
//! value function in the cap is quasi-logconvex.

use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correspondence::{RiskFunctional, Side};
use crate::prob::{expect_p, Position, PositivePosition, ProbSpace};
use crate::{rel_gap, Error, Result};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Gross return paths
// ---------------------------------------------------------------------------

/// A rectangular matrix of per-period gross returns: `rows[t][i]` is the
/// gross return of asset `i` over period `t`. All entries are strictly
/// positive and finite.
#[derive(Debug, Clone)]
pub struct GrossReturns {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl GrossReturns {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::ScenarioInput("no assets in the returns matrix".into()));
        }
        if rows.is_empty() {
            return Err(Error::ScenarioInput("no periods in the returns matrix".into()));
        }
        for (t, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::ScenarioInput(format!(
                    "period {t} has {} returns but there are {} assets",
                    row.len(),
                    names.len()
                )));
            }
            for (i, g) in row.iter().enumerate() {
                if !(g.is_finite() && *g > 0.0) {
                    return Err(Error::ScenarioInput(format!(
                        "gross return for asset {} in period {t} must be positive \
                         and finite, got {g}",
                        names[i]
                    )));
                }
            }
        }
        Ok(GrossReturns { names, rows })
    }

    pub fn assets(&self) -> usize {
        self.names.len()
    }

    pub fn periods(&self) -> usize {
        self.rows.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

fn validate_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {n} assets",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn validate_initial_wealth(w0: f64) -> Result<()> {
    if !(w0.is_finite() && w0 > 0.0) {
        return Err(Error::InvalidParameter(format!("initial wealth must be positive, got {w0}")));
    }
    Ok(())
}

/// Wealth path of a buy-and-hold portfolio: initial wealth is split by the
/// weights once and each sleeve compounds on its own. Returns
/// `periods + 1` values starting at `w0`.
pub fn wealth_buy_and_hold(w0: f64, weights: &[f64], returns: &GrossReturns) -> Result<Vec<f64>> {
    validate_initial_wealth(w0)?;
    validate_weights(weights, returns.assets())?;
    let mut sleeves: Vec<f64> = weights.iter().map(|w| w * w0).collect();
    let mut path = Vec::with_capacity(returns.periods() + 1);
    path.push(w0);
    for row in returns.rows() {
        for (s, g) in sleeves.iter_mut().zip(row) {
            *s *= g;
        }
        path.push(sleeves.iter().sum());
    }
    Ok(path)
}

/// Wealth path with `substeps` rebalances per period: each period's gross
/// return is split into `substeps` equal geometric legs and the portfolio
/// is rebalanced to the target weights after every leg, giving a
/// per-period factor `(sum_i w_i G_i^(1/k))^k`.
pub fn wealth_rebalanced(
    w0: f64,
    weights: &[f64],
    returns: &GrossReturns,
    substeps: usize,
) -> Result<Vec<f64>> {
    validate_initial_wealth(w0)?;
    validate_weights(weights, returns.assets())?;
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be at least 1".into()));
    }
    let k = substeps as f64;
    let mut wealth = w0;
    let mut path = vec![w0];
    for row in returns.rows() {
        let leg: f64 = weights.iter().zip(row).map(|(w, g)| w * g.powf(1.0 / k)).sum();
        wealth *= leg.powf(k);
        path.push(wealth);
    }
    Ok(path)
}

/// Continuous-rebalancing limit: the per-period factor is the weighted
/// geometric mean `prod_i G_i^{w_i}` of the asset returns.
pub fn wealth_rebalanced_limit(
    w0: f64,
    weights: &[f64],
    returns: &GrossReturns,
) -> Result<Vec<f64>> {
    validate_initial_wealth(w0)?;
    validate_weights(weights, returns.assets())?;
    let mut log_wealth = w0.ln();
    let mut path = vec![w0];
    for row in returns.rows() {
        log_wealth += weights.iter().zip(row).map(|(w, g)| w * g.ln()).sum::<f64>();
        path.push(log_wealth.exp());
    }
    Ok(path)
}

/// Pathwise ordering of the three strategies.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyOrderingReport {
    /// Rebalanced wealth is nonincreasing in the substep count, pathwise.
    pub substeps_monotone: bool,
    /// Every rebalanced path dominates the continuous limit, pathwise.
    pub rebalanced_dominates_limit: bool,
    /// Buy-and-hold dominates the continuous limit, pathwise.
    pub buy_and_hold_dominates_limit: bool,
    pub worst_rel_violation: f64,
}

impl StrategyOrderingReport {
    pub fn holds(&self) -> bool {
        self.substeps_monotone
            && self.rebalanced_dominates_limit
            && self.buy_and_hold_dominates_limit
    }
}

/// Verifies the power-mean orderings among the wealth paths for the given
/// substep counts (must be increasing). Violations beyond a relative
/// 1e-10 flip the corresponding flag.
pub fn check_strategy_orderings(
    w0: f64,
    weights: &[f64],
    returns: &GrossReturns,
    substep_grid: &[usize],
) -> Result<StrategyOrderingReport> {
    if substep_grid.windows(2).any(|w| w[1] <= w[0]) || substep_grid.is_empty() {
        return Err(Error::InvalidParameter("substep grid must be strictly increasing".into()));
    }
    const TOL: f64 = 1e-10;
    let limit = wealth_rebalanced_limit(w0, weights, returns)?;
    let bh = wealth_buy_and_hold(w0, weights, returns)?;
    let paths: Vec<Vec<f64>> = substep_grid
        .iter()
        .map(|&k| wealth_rebalanced(w0, weights, returns, k))
        .collect::<Result<_>>()?;

    let mut worst = 0.0_f64;
    let mut gap = |lo: &[f64], hi: &[f64]| -> bool {
        let mut ok = true;
        for (a, b) in lo.iter().zip(hi) {
            let g = rel_gap(*a, *b);
            worst = worst.max(g);
            ok &= g <= TOL;
        }
        ok
    };

    let mut substeps_monotone = true;
    for pair in paths.windows(2) {
        // More substeps means a smaller power mean: pair[1] <= pair[0].
        substeps_monotone &= gap(&pair[1], &pair[0]);
    }
    let mut rebalanced_dominates_limit = true;
    for p in &paths {
        rebalanced_dominates_limit &= gap(&limit, p);
    }
    let buy_and_hold_dominates_limit = gap(&limit, &bh);

    Ok(StrategyOrderingReport {
        substeps_monotone,
        rebalanced_dominates_limit,
        buy_and_hold_dominates_limit,
        worst_rel_violation: worst,
    })
}

// ---------------------------------------------------------------------------
// Measure-level diversification inequalities
// ---------------------------------------------------------------------------

/// Two terminal-wealth positions and the fraction of initial capital put
/// into the first one.
#[derive(Debug, Clone)]
pub struct WealthPair {
    pub a: PositivePosition,
    pub b: PositivePosition,
    pub weight: f64,
}

impl WealthPair {
    pub fn new(a: PositivePosition, b: PositivePosition, weight: f64) -> Result<Self> {
        crate::prob::require_same_space(a.space(), b.space(), "wealth pair")?;
        if !(weight.is_finite() && (0.0..=1.0).contains(&weight)) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight must lie in [0, 1], got {weight}"
            )));
        }
        Ok(WealthPair { a, b, weight })
    }
}

/// Measure-level diversification diagnostics over a batch of wealth
/// pairs. Buy-and-hold mixes the two terminal wealths arithmetically,
/// `w*A + (1-w)*B`; continuous rebalancing mixes them geometrically,
/// `A^w * B^(1-w)`. Each flag says whether the measure of the mixed
/// wealth stayed below the worse of the two pure strategies on every
/// pair.
#[derive(Debug, Clone, Serialize)]
pub struct DiversificationReport {
    /// `measure(w*A + (1-w)*B) <= max(measure(A), measure(B))` held on
    /// every pair. Guaranteed for quasi-convex measures.
    pub buy_and_hold_holds: bool,
    /// `measure(A^w * B^(1-w)) <= max(measure(A), measure(B))` held on
    /// every pair. Guaranteed for quasi-logconvex measures.
    pub rebalanced_holds: bool,
    pub pairs: usize,
    pub worst_buy_and_hold_gap: f64,
    pub worst_rebalanced_gap: f64,
    /// Index of the first pair where the arithmetic-mixture inequality
    /// failed, if any.
    pub first_buy_and_hold_violation: Option<usize>,
    /// Index of the first pair where the geometric-mixture inequality
    /// failed, if any.
    pub first_rebalanced_violation: Option<usize>,
}

/// Checks both diversification inequalities for `measure` on each wealth
/// pair. Violations beyond a relative `tol` flip the respective flag; the
/// worst relative gap for each mixture is always reported.
pub fn check_diversification_inequalities(
    measure: &RiskFunctional,
    pairs: &[WealthPair],
    tol: f64,
) -> Result<DiversificationReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no wealth pairs to check".into()));
    }
    let mut worst_arith = 0.0_f64;
    let mut worst_geom = 0.0_f64;
    let mut first_arith = None;
    let mut first_geom = None;
    for (idx, pair) in pairs.iter().enumerate() {
        crate::prob::require_same_space(measure.space(), pair.a.space(), "wealth pair")?;
        let w = pair.weight;
        let bound = measure.eval_positive(&pair.a)?.max(measure.eval_positive(&pair.b)?);

        let space = pair.a.space().clone();
        let arith: Vec<f64> = pair
            .a
            .values()
            .iter()
            .zip(pair.b.values())
            .map(|(a, b)| w * a + (1.0 - w) * b)
            .collect();
        let geom: Vec<f64> = pair
            .a
            .values()
            .iter()
            .zip(pair.b.values())
            .map(|(a, b)| a.powf(w) * b.powf(1.0 - w))
            .collect();

        let ga = rel_gap(
            measure.eval_positive(&PositivePosition::new(space.clone(), arith)?)?,
            bound,
        );
        worst_arith = worst_arith.max(ga);
        if ga > tol && first_arith.is_none() {
            first_arith = Some(idx);
        }

        let gg = rel_gap(measure.eval_positive(&PositivePosition::new(space, geom)?)?, bound);
        worst_geom = worst_geom.max(gg);
        if gg > tol && first_geom.is_none() {
            first_geom = Some(idx);
        }
    }
    Ok(DiversificationReport {
        buy_and_hold_holds: first_arith.is_none(),
        rebalanced_holds: first_geom.is_none(),
        pairs: pairs.len(),
        worst_buy_and_hold_gap: worst_arith,
        worst_rebalanced_gap: worst_geom,
        first_buy_and_hold_violation: first_arith,
        first_rebalanced_violation: first_geom,
    })
}

/// Seeded batch of wealth pairs: log-wealths uniform on `log_range` per
/// atom, mixing weights uniform on [0.01, 0.99].
pub fn sampled_wealth_pairs(
    space: &Arc<ProbSpace>,
    count: usize,
    seed: u64,
    log_range: (f64, f64),
) -> Result<Vec<WealthPair>> {
    let (lo, hi) = log_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad log range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.len();
    let draw = |rng: &mut ChaCha8Rng| -> Result<PositivePosition> {
        let vals: Vec<f64> = (0..n).map(|_| (lo + (hi - lo) * rng.gen::<f64>()).exp()).collect();
        PositivePosition::new(space.clone(), vals)
    };
    (0..count)
        .map(|_| {
            let a = draw(&mut rng)?;
            let b = draw(&mut rng)?;
            let w = 0.01 + 0.98 * rng.gen::<f64>();
            WealthPair::new(a, b, w)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Risk-constrained portfolio choice
// ---------------------------------------------------------------------------

/// Assets plus the geometric measure to minimize. The decision variable is
/// a simplex weight vector `w`; the portfolio return is the weighted
/// geometric basket `prod_i Y_i^{w_i}`.
pub struct PortfolioProblem {
    measure: RiskFunctional,
    assets: Vec<PositivePosition>,
    log_means: Vec<f64>,
}

impl PortfolioProblem {
    pub fn new(measure: RiskFunctional, assets: Vec<PositivePosition>) -> Result<Self> {
        if measure.side() != Side::Return {
            return Err(Error::Precondition(format!(
                "portfolio choice needs a geometric measure; {} is monetary",
                measure.label()
            )));
        }
        if assets.is_empty() {
            return Err(Error::InvalidParameter("no assets".into()));
        }
        if assets.len() > 16 {
            return Err(Error::EnumerationBound(format!(
                "{} assets exceed the supported maximum of 16",
                assets.len()
            )));
        }
        for a in &assets {
            crate::prob::require_same_space(measure.space(), a.space(), "portfolio assets")?;
        }
        let log_means = assets.iter().map(|a| expect_p(&a.ln())).collect();
        Ok(PortfolioProblem { measure, assets, log_means })
    }

    pub fn assets(&self) -> usize {
        self.assets.len()
    }

    /// Reference-measure expected log return of each asset.
    pub fn asset_log_means(&self) -> &[f64] {
        &self.log_means
    }

    pub fn expected_log_return(&self, weights: &[f64]) -> f64 {
        weights.iter().zip(&self.log_means).map(|(w, m)| w * m).sum()
    }

    /// The basket position `prod_i Y_i^{w_i}`.
    pub fn basket(&self, weights: &[f64]) -> Result<PositivePosition> {
        validate_weights(weights, self.assets.len())?;
        let space = self.measure.space().clone();
        let mut logs = vec![0.0; space.len()];
        for (w, a) in weights.iter().zip(&self.assets) {
            for (acc, v) in logs.iter_mut().zip(a.ln().values()) {
                *acc += w * v;
            }
        }
        Position::new(space, logs)?.exp()
    }

    /// Geometric measure of the basket.
    pub fn objective(&self, weights: &[f64]) -> Result<f64> {
        self.measure.eval_positive(&self.basket(weights)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// Refinement ran its step schedule down to the floor.
    Converged,
    /// The sweep cap was hit before the step floor; the reported point is
    /// the best found.
    SweepCapped,
    /// The constraint set is empty at this cap; the numeric fields of the
    /// solution are NaN and the weights are NaN-filled.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Simplex seed-grid denominator; `None` picks one from the asset
    /// count (64 for up to three assets, coarser beyond).
    pub seed_denominator: Option<usize>,
    /// Pairwise-move refinement stops when the step drops below this.
    pub step_floor: f64,
    /// How many of the best grid seeds are refined.
    pub refined_seeds: usize,
    /// Safety cap on refinement sweeps per seed.
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { seed_denominator: None, step_floor: 1e-5, refined_seeds: 5, max_sweeps: 10_000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PortfolioSolution {
    pub weights: Vec<f64>,
    /// Geometric measure value at the optimum.
    pub value: f64,
    /// Log of the measure value (the monetary view of the objective).
    pub log_value: f64,
    pub expected_log_return: f64,
    pub cap: f64,
    pub status: SolveStatus,
}

fn simplex_grid(n: usize, denom: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=left {
            prefix.push(take);
            rec(n - 1, left - take, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(n, denom, &mut Vec::new(), &mut counts);
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / denom as f64).collect())
        .collect()
}

fn default_denominator(n: usize) -> usize {
    match n {
        0..=3 => 64,
        4 => 24,
        5 => 12,
        _ => 8,
    }
}

/// Minimizes the measure of the basket over simplex weights subject to
/// `E[log basket] <= cap`.
///
/// Feasibility needs `min_i E[log Y_i] <= cap`; the minimizing vertex is
/// always among the seeds, so a feasible problem always yields a point.
/// An empty constraint set is reported through `SolveStatus::Infeasible`
/// (with NaN value fields), never as an error. Seeds come from a coarse
/// simplex grid; the best few are refined by pairwise mass moves with a
/// halving step down to `step_floor`.
pub fn solve_portfolio(
    problem: &PortfolioProblem,
    cap: f64,
    cfg: &SolverConfig,
) -> Result<PortfolioSolution> {
    let n = problem.assets();
    let feasible = |w: &[f64]| problem.expected_log_return(w) <= cap + 1e-12;

    let min_mean_vertex = {
        let i = problem
            .asset_log_means()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite log means"))
            .expect("nonempty")
            .0;
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    if !feasible(&min_mean_vertex) {
        return Ok(PortfolioSolution {
            weights: vec![f64::NAN; n],
            value: f64::NAN,
            log_value: f64::NAN,
            expected_log_return: f64::NAN,
            cap,
            status: SolveStatus::Infeasible,
        });
    }

    let denom = cfg.seed_denominator.unwrap_or_else(|| default_denominator(n));
    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    for w in simplex_grid(n, denom) {
        if feasible(&w) {
            seeds.push((problem.objective(&w)?, w));
        }
    }
    seeds.push((problem.objective(&min_mean_vertex)?, min_mean_vertex));
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite objective"));
    seeds.truncate(cfg.refined_seeds.max(1));

    let mut best = seeds[0].clone();
    let mut best_capped = false;
    for (seed_val, seed_w) in seeds {
        let mut w = seed_w;
        let mut fw = seed_val;
        let mut step = 1.0 / denom as f64;
        let mut sweeps = 0;
        let mut capped = false;
        while step >= cfg.step_floor {
            if sweeps >= cfg.max_sweeps {
                capped = true;
                break;
            }
            sweeps += 1;
            let mut improved = false;
            for from in 0..n {
                for to in 0..n {
                    // Re-check the donor against the CURRENT weights: an
                    // accepted move earlier in this sweep may already have
                    // drained `w[from]` below the step.
                    if to == from || w[from] < step {
                        continue;
                    }
                    let mut trial = w.clone();
                    trial[from] -= step;
                    trial[to] += step;
                    if !feasible(&trial) {
                        continue;
                    }
                    let ft = problem.objective(&trial)?;
                    if ft < fw - 1e-15 {
                        w = trial;
                        fw = ft;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if fw < best.0 {
            best = (fw, w);
            best_capped = capped;
        }
    }

    let (value, weights) = best;
    Ok(PortfolioSolution {
        expected_log_return: problem.expected_log_return(&weights),
        log_value: value.ln(),
        weights,
        value,
        cap,
        status: if best_capped { SolveStatus::SweepCapped } else { SolveStatus::Converged },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierPoint {
    pub cap: f64,
    pub status: SolveStatus,
    pub value: f64,
    pub log_value: f64,
    pub weights: Vec<f64>,
    pub expected_log_return: f64,
}

/// Solves the portfolio problem along a grid of caps. Caps below the
/// smallest asset log mean yield points with `SolveStatus::Infeasible`.
pub fn efficient_frontier(
    problem: &PortfolioProblem,
    caps: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<FrontierPoint>> {
    caps.iter()
        .map(|&cap| {
            let s = solve_portfolio(problem, cap, cfg)?;
            Ok(FrontierPoint {
                cap,
                status: s.status,
                value: s.value,
                log_value: s.log_value,
                weights: s.weights,
                expected_log_return: s.expected_log_return,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierShape {
    /// Loosening the cap never raises the optimal value.
    pub monotone_nonincreasing: bool,
    /// On arithmetic cap triples, the middle value is at most the larger
    /// endpoint value (quasi-convexity along the frontier).
    pub quasi_convex: bool,
    pub worst_monotone_violation: f64,
    pub worst_quasi_convex_violation: f64,
}

impl FrontierShape {
    pub fn holds(&self) -> bool {
        self.monotone_nonincreasing && self.quasi_convex
    }
}

/// Shape diagnostics for a frontier sampled on an arithmetic cap grid.
/// Infeasible points (which can only occur at the low end of the grid)
/// are ignored.
pub fn check_frontier_shape(points: &[FrontierPoint], tol: f64) -> FrontierShape {
    let feasible: Vec<&FrontierPoint> =
        points.iter().filter(|p| p.status != SolveStatus::Infeasible).collect();
    let mut worst_mono = 0.0_f64;
    for pair in feasible.windows(2) {
        debug_assert!(pair[1].cap > pair[0].cap, "caps must be increasing");
        worst_mono = worst_mono.max(rel_gap(pair[1].value, pair[0].value));
    }
    let mut worst_qc = 0.0_f64;
    for triple in feasible.windows(3) {
        let arithmetic = (triple[0].cap + triple[2].cap) / 2.0;
        if (arithmetic - triple[1].cap).abs() > 1e-9 * 1.0_f64.max(arithmetic.abs()) {
            continue;
        }
        worst_qc = worst_qc.max(rel_gap(triple[1].value, triple[0].value.max(triple[2].value)));
    }
    FrontierShape {
        monotone_nonincreasing: worst_mono <= tol,
        quasi_convex: worst_qc <= tol,
        worst_monotone_violation: worst_mono,
        worst_quasi_convex_violation: worst_qc,
    }
}

// ---------------------------------------------------------------------------
// Exactly solvable monomial frontier
// ---------------------------------------------------------------------------

/// A monomial objective `F(w) = scale * prod_i w_i^{exponents[i]}`
/// minimized over the box `[box_lo, box_hi]^n` under the log-scale
/// constraint `sum_i constraint_coeffs[i] * log w_i <= log r`. In
/// log-coordinates this is a linear program solved exactly by a greedy
/// exchange, so the value function's shape in `r` can be tested without
/// solver noise.
#[derive(Debug, Clone, Serialize)]
pub struct MonomialFrontierSpec {
    pub exponents: Vec<f64>,
    pub scale: f64,
    pub constraint_coeffs: Vec<f64>,
    pub box_lo: f64,
    pub box_hi: f64,
}

impl MonomialFrontierSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.exponents.len();
        if n == 0 || self.constraint_coeffs.len() != n {
            return Err(Error::InvalidParameter(
                "exponents and constraint coefficients must be nonempty and equal length".into(),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {}", self.scale)));
        }
        if !(self.box_lo > 0.0 && self.box_hi > self.box_lo && self.box_hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < box_lo < box_hi, got [{}, {}]",
                self.box_lo, self.box_hi
            )));
        }
        if self.constraint_coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParameter(
                "constraint coefficients must be nonnegative".into(),
            ));
        }
        if self.constraint_coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::InvalidParameter("constraint coefficients are all zero".into()));
        }
        if self.exponents.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("exponents must be finite".into()));
        }
        Ok(())
    }

    /// Smallest reachable constraint value, i.e. the `log r` below which
    /// the program is infeasible.
    pub fn min_constraint(&self) -> f64 {
        self.constraint_coeffs.iter().map(|c| c * self.box_lo.ln()).sum()
    }
}

/// Exact optimum of the monomial program at cap `r`: the value and the
/// minimizing weight vector.
///
/// Greedy exchange in log-coordinates: start from the unconstrained box
/// minimum, then — if the constraint is violated — buy slack from the
/// coordinates where it is cheapest per unit (smallest
/// `-exponent / coefficient`), a fractional-knapsack argument that is
/// optimal for a single linear constraint over a box.
pub fn monomial_frontier_point(spec: &MonomialFrontierSpec, r: f64) -> Result<(f64, Vec<f64>)> {
    spec.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("cap must be positive and finite, got {r}")));
    }
    let b = r.ln();
    if spec.min_constraint() > b + 1e-12 {
        return Err(Error::Infeasible(format!(
            "log cap {b:.6e} below the smallest reachable constraint value {:.6e}",
            spec.min_constraint()
        )));
    }
    let (lo, hi) = (spec.box_lo.ln(), spec.box_hi.ln());
    let n = spec.exponents.len();
    let mut u: Vec<f64> = spec.exponents.iter().map(|&v| if v > 0.0 { lo } else { hi }).collect();
    let cdot = |u: &[f64]| -> f64 { u.iter().zip(&spec.constraint_coeffs).map(|(x, c)| x * c).sum() };
    if cdot(&u) > b {
        // Lower coordinates sitting at the top of the box, cheapest
        // objective cost per unit of constraint slack first.
        let mut order: Vec<usize> = (0..n)
            .filter(|&i| u[i] > lo && spec.constraint_coeffs[i] > 0.0)
            .collect();
        order.sort_by(|&i, &j| {
            let cost_i = -spec.exponents[i] / spec.constraint_coeffs[i];
            let cost_j = -spec.exponents[j] / spec.constraint_coeffs[j];
            cost_i.partial_cmp(&cost_j).expect("finite costs")
        });
        for i in order {
            let excess = cdot(&u) - b;
            if excess <= 0.0 {
                break;
            }
            let drop = (excess / spec.constraint_coeffs[i]).min(u[i] - lo);
            u[i] -= drop;
        }
        if cdot(&u) > b + 1e-9 {
            return Err(Error::Infeasible(
                "constraint unreachable after exhausting the box (numerical)".into(),
            ));
        }
    }
    let log_value =
        spec.scale.ln() + u.iter().zip(&spec.exponents).map(|(x, v)| x * v).sum::<f64>();
    Ok((log_value.exp(), u.iter().map(|x| x.exp()).collect()))
}

/// Exact optimal value of the monomial program at cap `r`.
pub fn monomial_frontier_value(spec: &MonomialFrontierSpec, r: f64) -> Result<f64> {
    Ok(monomial_frontier_point(spec, r)?.0)
}

/// Value function along a cap grid.
pub fn monomial_frontier(spec: &MonomialFrontierSpec, caps: &[f64]) -> Result<Vec<(f64, f64)>> {
    caps.iter().map(|&r| Ok((r, monomial_frontier_value(spec, r)?))).collect()
}

/// Quasi-logconvexity of a value function sampled on a geometric cap
/// grid: at every geometric-midpoint triple the middle value must not
/// exceed the larger endpoint value. Returns the worst relative violation.
pub fn check_geometric_quasi_convexity(points: &[(f64, f64)], tol: f64) -> (bool, f64) {
    let mut worst = 0.0_f64;
    for t in points.windows(3) {
        let geometric_mid = (t[0].0 * t[2].0).sqrt();
        if (geometric_mid - t[1].0).abs() > 1e-9 * geometric_mid {
            continue;
        }
        worst = worst.max(rel_gap(t[1].1, t[0].1.max(t[2].1)));
    }
    (worst <= tol, worst)
}

// ---------------------------------------------------------------------------
// Generalized frontier under a log-scale constraint
// ---------------------------------------------------------------------------

/// Portfolio choice beyond the simplex: weights range over the positive
/// box `[box_lo, box_hi]^n`, the constraint set at cap `r` is
/// `C_r = {w : sum_i E[X_i]·log(w_i) <= log r}` for given positions
/// `X_i`, and the objective is `measure(prod_i w_i^{v_i} · G)` for a
/// scalar monomial in the weights times a fixed positive base position
/// `G`. This objective turns componentwise-geometric weight mixtures into
/// geometric position mixtures, which is what makes the value function in
/// `r` quasi-logconvex for quasi-logconvex measures.
pub struct GeneralizedFrontierProblem {
    measure: RiskFunctional,
    constraint_coeffs: Vec<f64>,
    objective_exponents: Vec<f64>,
    base: PositivePosition,
    box_lo: f64,
    box_hi: f64,
}

impl GeneralizedFrontierProblem {
    /// `assets` are the positions `X_i` whose reference means become the
    /// constraint coefficients; those means must be nonnegative and not
    /// all zero. `objective_exponents` defaults to the same means and
    /// `base` to the unit position.
    pub fn new(
        measure: RiskFunctional,
        assets: &[Position],
        objective_exponents: Option<Vec<f64>>,
        base: Option<PositivePosition>,
        box_lo: f64,
        box_hi: f64,
    ) -> Result<Self> {
        if measure.side() != Side::Return {
            return Err(Error::Precondition(format!(
                "the generalized frontier needs a geometric measure; {} is monetary",
                measure.label()
            )));
        }
        if assets.is_empty() {
            return Err(Error::InvalidParameter("no assets".into()));
        }
        for a in assets {
            crate::prob::require_same_space(measure.space(), a.space(), "frontier assets")?;
        }
        let coeffs: Vec<f64> = assets.iter().map(expect_p).collect();
        if coeffs.iter().any(|c| *c < 0.0) || coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::InvalidParameter(
                "asset log means must be nonnegative and not all zero; assets with \
                 negative expected log return are not supported here"
                    .into(),
            ));
        }
        let exponents = objective_exponents.unwrap_or_else(|| coeffs.clone());
        let base = match base {
            Some(g) => {
                crate::prob::require_same_space(measure.space(), g.space(), "frontier base")?;
                g
            }
            None => PositivePosition::constant(measure.space().clone(), 1.0)?,
        };
        let problem = GeneralizedFrontierProblem {
            measure,
            constraint_coeffs: coeffs,
            objective_exponents: exponents,
            base,
            box_lo,
            box_hi,
        };
        problem.monomial_spec().validate()?;
        Ok(problem)
    }

    fn monomial_spec(&self) -> MonomialFrontierSpec {
        MonomialFrontierSpec {
            exponents: self.objective_exponents.clone(),
            scale: 1.0,
            constraint_coeffs: self.constraint_coeffs.clone(),
            box_lo: self.box_lo,
            box_hi: self.box_hi,
        }
    }

    pub fn constraint_coeffs(&self) -> &[f64] {
        &self.constraint_coeffs
    }

    /// Constraint left-hand side `sum_i E[X_i]·log(w_i)`.
    pub fn constraint_value(&self, weights: &[f64]) -> f64 {
        weights.iter().zip(&self.constraint_coeffs).map(|(w, c)| c * w.ln()).sum()
    }

    /// Smallest reachable constraint value over the box; caps with
    /// `ln(r)` below it are infeasible.
    pub fn min_constraint(&self) -> f64 {
        self.monomial_spec().min_constraint()
    }

    /// The objective `measure(prod_i w_i^{v_i} · G)` at the given box
    /// weights.
    pub fn objective(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.constraint_coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} assets",
                weights.len(),
                self.constraint_coeffs.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("box weights must be positive".into()));
        }
        let s: f64 = weights
            .iter()
            .zip(&self.objective_exponents)
            .map(|(w, v)| v * w.ln())
            .sum::<f64>()
            .exp();
        self.measure.eval_positive(&self.base.scale(s)?)
    }
}

/// One cap of the generalized frontier.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedFrontierPoint {
    pub cap: f64,
    pub status: SolveStatus,
    pub value: f64,
    pub log_value: f64,
    pub weights: Vec<f64>,
    /// Constraint left-hand side at the optimum; feasible points satisfy
    /// `constraint_value <= ln(cap)`.
    pub constraint_value: f64,
}

/// Solves the generalized box-constrained problem along a grid of caps.
///
/// The monomial objective is a nondecreasing transform of the scalar
/// `prod_i w_i^{v_i}` (risk measures are monotone), so each solve reduces
/// exactly to the monomial program: no iterative refinement and no solver
/// noise. Caps whose log lies below the smallest reachable constraint
/// value yield `SolveStatus::Infeasible` points.
pub fn generalized_frontier_logconstraint(
    problem: &GeneralizedFrontierProblem,
    caps: &[f64],
) -> Result<Vec<GeneralizedFrontierPoint>> {
    let spec = problem.monomial_spec();
    let n = spec.exponents.len();
    caps.iter()
        .map(|&r| {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cap must be positive and finite, got {r}"
                )));
            }
            if spec.min_constraint() > r.ln() + 1e-12 {
                return Ok(GeneralizedFrontierPoint {
                    cap: r,
                    status: SolveStatus::Infeasible,
                    value: f64::NAN,
                    log_value: f64::NAN,
                    weights: vec![f64::NAN; n],
                    constraint_value: f64::NAN,
                });
            }
            let (_, weights) = monomial_frontier_point(&spec, r)?;
            let value = problem.objective(&weights)?;
            Ok(GeneralizedFrontierPoint {
                cap: r,
                status: SolveStatus::Converged,
                value,
                log_value: value.ln(),
                constraint_value: problem.constraint_value(&weights),
                weights,
            })
        })
        .collect()
}
