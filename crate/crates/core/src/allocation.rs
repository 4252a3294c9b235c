//! Multiplicative capital allocation for dual geometric measures.
//!
//! Allocation answers: of the total capital requirement `trho(X)`, what
//! share does business unit `X_i` carry? For a dual measure the natural
//! anchor is the optimal scenario `Q*` attaining `trho(X)`; three
//! allocation rules are built on it:
//!
//! * subdifferential — the unit's geometric mean under `Q*`,
//!   `exp(E_{Q*}[log X_i])`; for the worst-case geometric mean this is a
//!   marginal (Euler-type) allocation, and across a multiplicative
//!   decomposition `X = prod_i X_i` the rule is fully additive in the
//!   geometric sense (the allocations multiply to `trho(X)`);
//! * proportional — `trho(X) * exp(R(E_{Q*}[log(X_i / X)]; Q*))`,
//!   which corrects the total by the transformed log-ratio of the unit to
//!   the whole;
//! * acceptance — the smallest level `m` on a geometric grid such that
//!   `m / X_i` is acceptable under the built-in family of `X`, whose
//!   membership rule is a nonnegative `Q*`-mean of the log position; this
//!   lands within one grid step of the subdifferential rule.

use serde::Serialize;

use crate::duality::DualMeasure;
use crate::measures::h0_premium;
use crate::prob::{expect, PositivePosition};
use crate::{Error, Result};

/// Geometric grid used by the acceptance rule: `e^-8` to `e^8` in steps of
/// `e^0.05` (321 levels).
fn acceptance_grid() -> impl Iterator<Item = f64> {
    (0..=320).map(|k| (-8.0 + 0.05 * k as f64).exp())
}

/// Multiplicative spacing of the acceptance rule's level grid.
pub fn acceptance_grid_step() -> f64 {
    0.05_f64.exp()
}

/// Index of the scenario attaining `trho(total)`; ties resolve to the
/// lowest index.
pub fn optimal_scenario(dm: &DualMeasure, total: &PositivePosition) -> Result<usize> {
    Ok(dm.eval_with_scenario(total)?.1)
}

fn anchored_scenario(dm: &DualMeasure, total: &PositivePosition) -> Result<usize> {
    crate::prob::require_same_space(dm.scenarios().space(), total.space(), "allocation total")?;
    optimal_scenario(dm, total)
}

/// Subdifferential rule: the unit's geometric mean under the total's
/// optimal scenario.
pub fn car_subdifferential(
    dm: &DualMeasure,
    unit: &PositivePosition,
    total: &PositivePosition,
) -> Result<f64> {
    let j = anchored_scenario(dm, total)?;
    h0_premium(unit, dm.scenarios().get(j))
}

/// Proportional rule: the total requirement scaled by the transformed
/// log-ratio of unit to total under the optimal scenario.
pub fn car_proportional(
    dm: &DualMeasure,
    unit: &PositivePosition,
    total: &PositivePosition,
) -> Result<f64> {
    let j = anchored_scenario(dm, total)?;
    let ratio = unit.div(total)?;
    if ratio.values().iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidPosition(
            "unit/total ratio left the positive range (over- or underflow)".into(),
        ));
    }
    let t = expect(&ratio.ln(), dm.scenarios().get(j))?;
    let total_value = dm.eval(total)?;
    Ok(total_value * dm.r().eval(t, j)?.exp())
}

/// Acceptance rule: the smallest grid level `m` whose scaled-down unit
/// `m / X_i` is acceptable for the total's built-in family — membership
/// means the `Q*`-mean of the log position is nonnegative. Within one grid
/// step of the subdifferential rule by construction. When no grid level
/// accepts the unit the extended value `+inf` is returned.
pub fn car_acceptance(
    dm: &DualMeasure,
    unit: &PositivePosition,
    total: &PositivePosition,
) -> Result<f64> {
    let j = anchored_scenario(dm, total)?;
    let q = dm.scenarios().get(j);
    let inverted = unit.recip()?;
    for m in acceptance_grid() {
        let scaled = inverted.scale(m)?;
        if scaled.values().iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidPosition(
                "acceptance-rule candidate left the positive range".into(),
            ));
        }
        if expect(&scaled.ln(), q)? >= 0.0 {
            return Ok(m);
        }
    }
    Ok(f64::INFINITY)
}

/// One unit's allocation under all three rules.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationResult {
    /// Index of the scenario the rules are anchored on.
    pub scenario: usize,
    /// `trho(total)`.
    pub measure_total: f64,
    pub subdifferential: f64,
    pub proportional: f64,
    pub acceptance: f64,
}

/// Computes all three rules for one unit against a total, then re-derives
/// the optimal scenario and verifies the anchor is still optimal within a
/// relative 1e-10 — a guard against inconsistent inputs mutating between
/// calls.
pub fn allocate(
    dm: &DualMeasure,
    unit: &PositivePosition,
    total: &PositivePosition,
) -> Result<AllocationResult> {
    let (measure_total, scenario) = dm.eval_with_scenario(total)?;
    let subdifferential = car_subdifferential(dm, unit, total)?;
    let proportional = car_proportional(dm, unit, total)?;
    let acceptance = car_acceptance(dm, unit, total)?;

    // Re-verify: the anchored scenario must still attain the maximum.
    let lx = total.ln();
    let mut best = f64::NEG_INFINITY;
    for (j, q) in dm.scenarios().iter().enumerate() {
        best = best.max(dm.r().eval(expect(&lx, q)?, j)?);
    }
    let anchored = dm.r().eval(expect(&lx, dm.scenarios().get(scenario))?, scenario)?;
    if best - anchored > 1e-10 * 1.0_f64.max(best.abs()) {
        return Err(Error::Inconsistent(format!(
            "scenario {scenario} no longer attains the maximum ({anchored:.12e} vs {best:.12e})"
        )));
    }

    Ok(AllocationResult { scenario, measure_total, subdifferential, proportional, acceptance })
}

/// Allocates a multiplicative decomposition: the total is the pointwise
/// product of the units. Returns the total position alongside one
/// [`AllocationResult`] per unit.
pub fn allocate_units(
    dm: &DualMeasure,
    units: &[PositivePosition],
) -> Result<(PositivePosition, Vec<AllocationResult>)> {
    if units.is_empty() {
        return Err(Error::InvalidParameter("no units to allocate".into()));
    }
    let mut total = units[0].clone();
    for u in &units[1..] {
        total = total.mul(u)?;
    }
    let results = units.iter().map(|u| allocate(dm, u, &total)).collect::<Result<Vec<_>>>()?;
    Ok((total, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{RFunctional, RFunctionalSpec};
    use crate::prob::{ProbSpace, Scenario, ScenarioSet};
    use std::sync::Arc;

    fn two_scenarios(space: &Arc<ProbSpace>) -> ScenarioSet {
        let n = space.len();
        let mut tilt: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let z: f64 = tilt.iter().zip(space.probs()).map(|(d, p)| d * p).sum();
        tilt.iter_mut().for_each(|d| *d /= z);
        ScenarioSet::new(vec![
            Scenario::reference(space.clone()),
            Scenario::new(space.clone(), tilt).unwrap(),
        ])
        .unwrap()
    }

    fn coherent(space: &Arc<ProbSpace>) -> DualMeasure {
        DualMeasure::new(
            RFunctional::new(RFunctionalSpec::Coherent).unwrap(),
            two_scenarios(space),
        )
        .unwrap()
    }

    fn pos(space: &Arc<ProbSpace>, vals: &[f64]) -> PositivePosition {
        PositivePosition::new(space.clone(), vals.to_vec()).unwrap()
    }

    #[test]
    fn self_allocation_returns_the_measure_for_zero_at_zero_transforms() {
        let sp = ProbSpace::uniform(3);
        let x = pos(&sp, &[0.8, 1.4, 2.0]);
        for spec in [
            RFunctionalSpec::Coherent,
            RFunctionalSpec::SupqPenalty { base_penalties: vec![0.2, 0.4] },
            RFunctionalSpec::MeanValue {
                transform: crate::measures::LossTransform::PiecewiseQuadratic,
            },
        ] {
            let dm =
                DualMeasure::new(RFunctional::new(spec).unwrap(), two_scenarios(&sp)).unwrap();
            let total_value = dm.eval(&x).unwrap();
            let prop = car_proportional(&dm, &x, &x).unwrap();
            assert!(
                crate::close_rel(prop, total_value, 1e-10),
                "{:?}: {prop} vs {total_value}",
                dm.r().spec()
            );
        }
    }

    #[test]
    fn coherent_proportional_equals_subdifferential() {
        let sp = ProbSpace::uniform(3);
        let dm = coherent(&sp);
        let total = pos(&sp, &[0.9, 1.3, 1.8]);
        for unit_vals in [[1.1, 0.7, 1.4], [2.0, 2.0, 0.5]] {
            let unit = pos(&sp, &unit_vals);
            let sub = car_subdifferential(&dm, &unit, &total).unwrap();
            let prop = car_proportional(&dm, &unit, &total).unwrap();
            assert!(crate::close_rel(sub, prop, 1e-12), "{sub} vs {prop}");
        }
    }

    #[test]
    fn scaling_a_unit_scales_the_allocation_for_shift_preserving_transforms() {
        let sp = ProbSpace::uniform(2);
        let qs = two_scenarios(&sp);
        let dm = DualMeasure::new(
            RFunctional::new(RFunctionalSpec::ConvexPenalty { penalties: vec![0.0, 0.3] })
                .unwrap(),
            qs,
        )
        .unwrap();
        let x = pos(&sp, &[0.7, 1.9]);
        let beta = 1.7;
        let base = car_proportional(&dm, &x, &x).unwrap();
        let scaled = car_proportional(&dm, &x.scale(beta).unwrap(), &x).unwrap();
        assert!(crate::close_rel(scaled, beta * base, 1e-12), "{scaled} vs {}", beta * base);
    }

    #[test]
    fn subdifferential_allocations_multiply_to_the_total_for_coherent_measures() {
        let sp = ProbSpace::uniform(3);
        let dm = coherent(&sp);
        let units =
            vec![pos(&sp, &[1.2, 0.9, 1.1]), pos(&sp, &[0.8, 1.5, 1.0]), pos(&sp, &[1.0, 1.0, 1.3])];
        let (total, results) = allocate_units(&dm, &units).unwrap();
        let product: f64 = results.iter().map(|r| r.subdifferential).product();
        let whole = dm.eval(&total).unwrap();
        assert!(crate::close_rel(product, whole, 1e-12), "{product} vs {whole}");
        // All results anchor on the same scenario.
        let anchor = results[0].scenario;
        assert!(results.iter().all(|r| r.scenario == anchor));
    }

    #[test]
    fn acceptance_rule_lands_within_one_grid_step_of_the_subdifferential() {
        let sp = ProbSpace::uniform(4);
        let dm = coherent(&sp);
        let total = pos(&sp, &[1.0, 1.2, 0.8, 1.5]);
        let step = acceptance_grid_step();
        for unit_vals in [[0.5, 1.0, 2.0, 1.0], [3.0, 0.4, 1.0, 1.1], [1.0, 1.0, 1.0, 1.0]] {
            let unit = pos(&sp, &unit_vals);
            let sub = car_subdifferential(&dm, &unit, &total).unwrap();
            let acc = car_acceptance(&dm, &unit, &total).unwrap();
            assert!(
                acc >= sub / (1.0 + 1e-12) && acc <= sub * step * (1.0 + 1e-12),
                "acceptance {acc} vs subdifferential {sub}"
            );
        }
    }

    #[test]
    fn allocation_reports_are_internally_consistent() {
        let sp = ProbSpace::uniform(3);
        let dm = coherent(&sp);
        let total = pos(&sp, &[0.9, 1.3, 1.8]);
        let unit = pos(&sp, &[1.1, 0.7, 1.4]);
        let rep = allocate(&dm, &unit, &total).unwrap();
        assert_eq!(rep.scenario, optimal_scenario(&dm, &total).unwrap());
        assert!(crate::close_rel(rep.measure_total, dm.eval(&total).unwrap(), 1e-14));
        assert!(rep.subdifferential > 0.0 && rep.proportional > 0.0 && rep.acceptance > 0.0);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let sp = ProbSpace::uniform(3);
        let other = ProbSpace::uniform(2);
        let dm = coherent(&sp);
        let unit = pos(&other, &[1.0, 2.0]);
        let total = pos(&sp, &[1.0, 1.0, 1.0]);
        assert!(car_subdifferential(&dm, &unit, &total).is_err());
        assert!(allocate(&dm, &unit, &total).is_err());
    }

    #[test]
    fn subdifferential_rule_is_monotone_in_the_unit() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        // With the total (and hence the anchor scenario) held fixed,
        // improving a unit pointwise can only raise its allocated share.
        let sp = ProbSpace::uniform(4);
        let dm = coherent(&sp);
        let total = pos(&sp, &[0.9, 1.3, 1.8, 0.6]);
        let mut rng = ChaCha8Rng::seed_from_u64(613);
        for _ in 0..100 {
            let base: Vec<f64> =
                (0..4).map(|_| (-3.0 + 6.0 * rng.gen::<f64>()).exp()).collect();
            let bumped: Vec<f64> =
                base.iter().map(|v| v * (1.0 + rng.gen::<f64>())).collect();
            let lo = car_subdifferential(&dm, &pos(&sp, &base), &total).unwrap();
            let hi = car_subdifferential(&dm, &pos(&sp, &bumped), &total).unwrap();
            assert!(lo <= hi * (1.0 + 1e-12), "{lo} vs {hi}");
        }
    }

    #[test]
    fn acceptance_rule_saturates_to_infinity_beyond_the_grid() {
        let sp = ProbSpace::uniform(2);
        let dm = coherent(&sp);
        let total = pos(&sp, &[1.0, 2.0]);
        let unit = pos(&sp, &[9.0_f64.exp(), 9.0_f64.exp()]);
        assert_eq!(car_acceptance(&dm, &unit, &total).unwrap(), f64::INFINITY);
    }
}
