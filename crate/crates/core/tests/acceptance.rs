//! Release gate: one PASS/FAIL line per criterion, exit code 1 on any
//! failure. Each criterion re-derives its expected values through the
//! independent oracles in `common` (dense grids, exhaustive enumeration,
//! closed forms) rather than trusting the library's primary routes.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use geomrisk_core::acceptance::{
    check_family_positively_homogeneous, check_family_star_shaped, family_from_measure,
    measure_from_family,
};
use geomrisk_core::allocation::{
    acceptance_grid_step, car_acceptance, car_proportional, car_subdifferential,
};
use geomrisk_core::correspondence::{
    bridge_equivalences, builtin_counterexamples, check_property, CheckConfig, Property,
};
use geomrisk_core::duality::{
    arar_mixture, arar_mixture_eval, law_invariant_dual_eval, recover_r, DualMeasure, RFunctional,
    RFunctionalSpec, RecoverConfig,
};
use geomrisk_core::measures::{builtin_specs, LossTransform};
use geomrisk_core::portfolio::{
    check_diversification_inequalities, check_frontier_shape, efficient_frontier,
    sampled_wealth_pairs, solve_portfolio, wealth_rebalanced, wealth_rebalanced_limit,
    GrossReturns, PortfolioProblem, SolverConfig,
};
use geomrisk_core::prob::{
    comonotone_integral, PositivePosition, ProbSpace, Scenario, ScenarioSet,
};
use geomrisk_core::measures::MeasureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn fail(msg: impl Into<String>) -> Verdict {
    Err(msg.into())
}

/// Reference set plus an index-proportional tilt, both strictly positive.
fn two_scenarios(space: &Arc<ProbSpace>) -> ScenarioSet {
    let n = space.len();
    let mut tilt: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let z: f64 = tilt.iter().zip(space.probs()).map(|(d, p)| d * p).sum();
    tilt.iter_mut().for_each(|d| *d /= z);
    ScenarioSet::new(vec![
        Scenario::reference(space.clone()),
        Scenario::new(space.clone(), tilt).expect("unit-mean tilt"),
    ])
    .expect("nonempty set")
}

// ---------------------------------------------------------------------------
// 1. Arithmetic-mixture counterexample against hand arithmetic
// ---------------------------------------------------------------------------

fn criterion_1() -> Verdict {
    let e = std::f64::consts::E;
    // Warm once so the timed run measures the computation, not first-touch.
    builtin_counterexamples().map_err(|er| er.to_string())?;
    let started = Instant::now();
    let report = builtin_counterexamples().map_err(|er| er.to_string())?;
    let elapsed = started.elapsed();

    let m = &report.mixture;
    // Hand value: the geometric mean of the arithmetic half-mixture of
    // (1, e^3) and the constant e^2 on two fair atoms.
    let hand = (0.5 * ((1.0 + e * e) / 2.0).ln() + 0.5 * ((e.powi(3) + e * e) / 2.0).ln()).exp();
    if (m.arithmetic_mixture_value - hand).abs() > 1e-9 {
        return fail(format!(
            "mixture value {:.12e} differs from hand value {hand:.12e}",
            m.arithmetic_mixture_value
        ));
    }
    if !(m.arithmetic_mixture_value > e * e) {
        return fail(format!(
            "mixture value {:.12e} fails to exceed e^2 = {:.12e}",
            m.arithmetic_mixture_value,
            e * e
        ));
    }
    if (m.measure_y - e * e).abs() > 1e-12 || m.quasi_logconvexity_slack < 0.0 {
        return fail("constant-leg value or geometric-mixture slack is off".to_string());
    }
    if elapsed.as_secs_f64() >= 1e-3 {
        return fail(format!("computation took {:?}, budget is 1 ms", elapsed));
    }
    Ok(format!(
        "mixture value {:.9} > e^2 = {:.9}, hand gap {:.1e}, {:.0} us",
        m.arithmetic_mixture_value,
        e * e,
        (m.arithmetic_mixture_value - hand).abs(),
        elapsed.as_secs_f64() * 1e6
    ))
}

// ---------------------------------------------------------------------------
// 2. Kinked certainty-equivalent scaling counterexample
// ---------------------------------------------------------------------------

fn criterion_2() -> Verdict {
    let e = std::f64::consts::E;
    let report = builtin_counterexamples().map_err(|er| er.to_string())?;
    let s = &report.scaling;
    let expected_scaled = (((11.0_f64).sqrt() - 1.0) / 2.0).exp();
    if (s.measure_x - e * e).abs() > 1e-9 {
        return fail(format!("measure of the base position {:.12e} is not e^2", s.measure_x));
    }
    if (s.measure_scaled - expected_scaled).abs() > 1e-9 {
        return fail(format!(
            "measure of the scaled position {:.12e} differs from {expected_scaled:.12e}",
            s.measure_scaled
        ));
    }
    if !(s.measure_scaled > e) {
        return fail(format!("scaled value {:.12e} does not exceed e", s.measure_scaled));
    }
    Ok(format!(
        "base {:.9} = e^2, scaled {:.9} > e (homogeneity gap {:.4})",
        s.measure_x, s.measure_scaled, s.homogeneity_violation
    ))
}

// ---------------------------------------------------------------------------
// 3. Exp/log round trip across every built-in measure
// ---------------------------------------------------------------------------

fn criterion_3() -> Verdict {
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let positions = common::seeded_positives(&sp, 500, 0xC3, -3.0, 3.0);
    let specs = builtin_specs(qs.len());
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for spec in &specs {
        let trho = spec.bind(&sp, Some(&qs)).map_err(|er| er.to_string())?;
        let rho = trho.to_monetary().map_err(|er| er.to_string())?;
        for x in &positions {
            let direct = trho.eval_positive(x).map_err(|er| er.to_string())?;
            let via_log = rho.eval(&x.ln()).map_err(|er| er.to_string())?.exp();
            let gap = (direct - via_log).abs();
            worst = worst.max(gap);
            if gap > 1e-12 {
                return fail(format!(
                    "{}: trho = {direct:.15e} but exp(rho(log x)) = {via_log:.15e}",
                    trho.label()
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        return fail(format!("round trips took {:?}, budget is 1 s", elapsed));
    }
    Ok(format!(
        "{} measures x 500 positions, worst |trho - exp(rho(log))| = {worst:.2e}, {:.0} ms",
        specs.len(),
        elapsed.as_secs_f64() * 1e3
    ))
}

// ---------------------------------------------------------------------------
// 4. Paired property verdicts agree across the correspondence
// ---------------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let specs = builtin_specs(qs.len());
    let cfg = CheckConfig { samples: 500, ..CheckConfig::seeded(0xC4) };
    let mut pairs_checked = 0;
    for spec in &specs {
        let trho = spec.bind(&sp, Some(&qs)).map_err(|er| er.to_string())?;
        let rho = trho.to_monetary().map_err(|er| er.to_string())?;
        let report = bridge_equivalences(&rho, &trho, &cfg).map_err(|er| er.to_string())?;
        for pair in &report.pairs {
            pairs_checked += 1;
            if !pair.agree {
                return fail(format!(
                    "{}: monetary {:?} = {} but geometric {:?} = {}",
                    trho.label(),
                    pair.monetary_property,
                    pair.monetary_holds,
                    pair.return_property,
                    pair.return_holds
                ));
            }
        }
    }
    Ok(format!(
        "{} measures x 8 property pairs = {pairs_checked} paired verdicts, all agree at N=500",
        specs.len()
    ))
}

// ---------------------------------------------------------------------------
// 5. Direct dual evaluation vs the building-block route
// ---------------------------------------------------------------------------

fn criterion_5() -> Verdict {
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let zoo: Vec<RFunctionalSpec> = vec![
        RFunctionalSpec::Coherent,
        RFunctionalSpec::ConvexPenalty { penalties: vec![0.3, 0.7] },
        RFunctionalSpec::SupqPenalty { base_penalties: vec![0.2, 0.5] },
        RFunctionalSpec::Floor { floor: 0.5 },
        RFunctionalSpec::LogFloor { a: 0.4 },
        RFunctionalSpec::MeanValue { transform: LossTransform::Identity },
        RFunctionalSpec::MeanValue { transform: LossTransform::PiecewiseQuadratic },
        RFunctionalSpec::UserTable { points: vec![(-4.0, -6.0), (0.0, 0.0), (4.0, 6.0)] },
    ];
    let positions = common::seeded_positives(&sp, 500, 0xC5, -3.0, 3.0);
    let mut worst = 0.0_f64;
    let families = zoo.len();
    for spec in zoo {
        let dm = DualMeasure::new(
            RFunctional::new(spec.clone()).map_err(|er| er.to_string())?,
            qs.clone(),
        )
        .map_err(|er| er.to_string())?;
        for x in &positions {
            let direct = dm.eval(x).map_err(|er| er.to_string())?;
            let blocks = dm.eval_building_block(x).map_err(|er| er.to_string())?;
            let gap = (direct - blocks).abs();
            worst = worst.max(gap);
            if gap > 1e-12 {
                return fail(format!(
                    "{spec:?}: direct {direct:.15e} vs building-block {blocks:.15e}"
                ));
            }
        }
    }
    Ok(format!(
        "{families} transform families x 500 positions, worst route gap {worst:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 6. Transform recovery against the dense boundary-scan oracle
// ---------------------------------------------------------------------------

fn criterion_6() -> Verdict {
    let started = Instant::now();
    let sp = ProbSpace::uniform(2);
    let qs = two_scenarios(&sp);
    let q0 = qs.get(0).clone();
    let cases: Vec<(RFunctionalSpec, Box<dyn Fn(f64) -> f64>)> = vec![
        (RFunctionalSpec::Coherent, Box::new(|t| t)),
        (
            RFunctionalSpec::ConvexPenalty { penalties: vec![0.3, 0.7] },
            Box::new(|t| t - 0.3),
        ),
        (RFunctionalSpec::Floor { floor: 0.5 }, Box::new(|t: f64| t.max(0.5))),
    ];
    let cfg = RecoverConfig::default();
    let mut worst_vs_oracle = 0.0_f64;
    let mut worst_vs_true = 0.0_f64;
    for (spec, truth) in &cases {
        let dm = DualMeasure::new(
            RFunctional::new(spec.clone()).map_err(|er| er.to_string())?,
            qs.clone(),
        )
        .map_err(|er| er.to_string())?;
        let trho = dm.as_risk_functional("dual");
        for k in 0..21 {
            let t = -2.0 + 0.2 * k as f64;
            let recovered = recover_r(&trho, t, &q0, &cfg).map_err(|er| er.to_string())?;
            let oracle = common::boundary_scan_log_min(&dm, t, &q0, cfg.bound, 1.0 / 512.0)
                .map_err(|er| er.to_string())?;
            let expected = truth(t);
            let gap_oracle = (recovered - oracle).abs();
            let gap_true = (recovered - expected).abs();
            worst_vs_oracle = worst_vs_oracle.max(gap_oracle);
            worst_vs_true = worst_vs_true.max(gap_true);
            if gap_oracle > 2e-4 || gap_true > 2e-4 {
                return fail(format!(
                    "{spec:?} at t = {t:.2}: recovered {recovered:.8}, scan oracle {oracle:.8}, \
                     closed form {expected:.8}"
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        return fail(format!("recovery took {:?}, budget is 30 s", elapsed));
    }
    Ok(format!(
        "3 transform families x 21 targets: worst gap {worst_vs_oracle:.2e} vs scan oracle, \
         {worst_vs_true:.2e} vs closed form, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 7. Law-invariant envelope vs exhaustive permutation enumeration
// ---------------------------------------------------------------------------

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let mut worst_perm = 0.0_f64;
    let mut worst_mix = 0.0_f64;
    let mut worst_mass = 0.0_f64;
    for n in 2..=5usize {
        let sp = ProbSpace::uniform(n);
        let qs = two_scenarios(&sp);
        let positions = common::seeded_positives(&sp, 50, 0xC7 ^ n as u64, -3.0, 3.0);
        for spec in [
            RFunctionalSpec::Coherent,
            RFunctionalSpec::ConvexPenalty { penalties: vec![0.2, 0.6] },
            RFunctionalSpec::Floor { floor: 0.25 },
        ] {
            let dm =
                DualMeasure::new(RFunctional::new(spec).map_err(|er| er.to_string())?, qs.clone())
                    .map_err(|er| er.to_string())?;
            for x in &positions {
                let envelope = law_invariant_dual_eval(&dm, x).map_err(|er| er.to_string())?;
                let brute = common::permutation_sup(&dm, x).map_err(|er| er.to_string())?;
                let gap = (envelope - brute).abs();
                worst_perm = worst_perm.max(gap);
                if gap > 1e-10 {
                    return fail(format!(
                        "n = {n}: envelope {envelope:.15e} vs permutation sup {brute:.15e}"
                    ));
                }
            }
        }
        // Tail-average mixture vs the rearrangement integral, scenario-wise.
        let q = qs.get(1);
        let weights = arar_mixture(q).map_err(|er| er.to_string())?;
        let mass: f64 = weights.masses.iter().sum();
        worst_mass = worst_mass.max((mass - 1.0).abs());
        if (mass - 1.0).abs() > 1e-10 {
            return fail(format!("n = {n}: mixture masses sum to {mass:.15}"));
        }
        for x in &positions {
            let mix = arar_mixture_eval(x, q).map_err(|er| er.to_string())?;
            let direct = comonotone_integral(&x.ln(), q).map_err(|er| er.to_string())?.exp();
            let sorted = common::sorted_products_mean(x.ln().values(), q.density()).exp();
            let gap = (mix - direct).abs().max((mix - sorted).abs());
            worst_mix = worst_mix.max(gap);
            if gap > 1e-9 {
                return fail(format!(
                    "n = {n}: mixture {mix:.15e} vs rearrangement {direct:.15e} / sorted {sorted:.15e}"
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        return fail(format!("law-invariance checks took {:?}, budget is 10 s", elapsed));
    }
    Ok(format!(
        "n in 2..=5: permutation gap {worst_perm:.2e}, mixture gap {worst_mix:.2e}, \
         mass defect {worst_mass:.2e}, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 8. Acceptance-family round trip and family-level property bridges
// ---------------------------------------------------------------------------

fn criterion_8() -> Verdict {
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let specs = builtin_specs(qs.len());
    let positions = common::seeded_positives(&sp, 200, 0xC8, -3.0, 3.0);
    let cfg = CheckConfig { samples: 500, ..CheckConfig::seeded(0xC8) };
    let mut star_matches = 0;
    let mut ph_matches = 0;
    for spec in &specs {
        let trho = spec.bind(&sp, Some(&qs)).map_err(|er| er.to_string())?;
        let fam = family_from_measure(&trho).map_err(|er| er.to_string())?;
        let step = fam.grid_step_factor();
        for x in &positions {
            let direct = trho.eval_positive(x).map_err(|er| er.to_string())?;
            let recovered = measure_from_family(&fam, x).map_err(|er| er.to_string())?;
            if !(recovered >= direct / (1.0 + 1e-9)
                && recovered <= direct * step * (1.0 + 1e-9))
            {
                return fail(format!(
                    "{}: recovered {recovered:.12e} not within one grid step above {direct:.12e}",
                    trho.label()
                ));
            }
        }
        let star_flag = check_property(&trho, Property::StarShaped, &cfg)
            .map_err(|er| er.to_string())?
            .holds;
        let ph_flag = check_property(&trho, Property::PositivelyHomogeneous, &cfg)
            .map_err(|er| er.to_string())?
            .holds;
        let fam_star =
            check_family_star_shaped(&fam, 300, 0xC8).map_err(|er| er.to_string())?.holds;
        let fam_ph = check_family_positively_homogeneous(&fam, 300, 0xC8)
            .map_err(|er| er.to_string())?
            .holds;
        if fam_star != star_flag {
            return fail(format!(
                "{}: family star verdict {fam_star} vs measure flag {star_flag}",
                trho.label()
            ));
        }
        if fam_ph != ph_flag {
            return fail(format!(
                "{}: family homogeneity verdict {fam_ph} vs measure flag {ph_flag}",
                trho.label()
            ));
        }
        star_matches += 1;
        ph_matches += 1;
    }
    Ok(format!(
        "{} measures: 200-position round trips within one grid step; star verdicts {}/{} \
         and homogeneity verdicts {}/{} match",
        specs.len(),
        star_matches,
        specs.len(),
        ph_matches,
        specs.len()
    ))
}

// ---------------------------------------------------------------------------
// 9. Portfolio solver vs dense simplex oracle; frontier shape
// ---------------------------------------------------------------------------

fn portfolio_instance(
    sp: &Arc<ProbSpace>,
    qs: &ScenarioSet,
    assets: usize,
    which_measure: usize,
    seed: u64,
) -> Result<PortfolioProblem, String> {
    let specs = builtin_specs(qs.len());
    // A rotation of solid geometric measures: tail averages, power means,
    // penalized worst-case geometric means.
    let chosen: Vec<&MeasureSpec> = vec![&specs[5], &specs[2], &specs[13], &specs[16], &specs[17]];
    let measure = chosen[which_measure % chosen.len()]
        .bind(sp, Some(qs))
        .map_err(|er| er.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let asset_positions: Vec<PositivePosition> = (0..assets)
        .map(|_| {
            let vals: Vec<f64> =
                (0..sp.len()).map(|_| (-0.5 + 1.0 * rng.gen::<f64>()).exp()).collect();
            PositivePosition::new(sp.clone(), vals).expect("positive")
        })
        .collect();
    PortfolioProblem::new(measure, asset_positions).map_err(|er| er.to_string())
}

fn criterion_9() -> Verdict {
    let started = Instant::now();
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let cfg = SolverConfig::default();
    let fracs = [0.35, 0.6, 0.85, 1.5, 0.5];
    let mut worst_gap = 0.0_f64;
    for i in 0..10usize {
        let assets = 2 + i % 2;
        let problem = portfolio_instance(&sp, &qs, assets, i, 0x900 + i as u64)?;
        let (lo, hi) = problem
            .asset_log_means()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| (a.min(m), b.max(m)));
        let cap = lo + fracs[i % fracs.len()] * (hi - lo).max(1e-6);
        let sol =
            solve_portfolio(&problem, cap, &cfg).map_err(|er| format!("instance {i} solve: {er}"))?;
        let oracle = common::dense_simplex_min(&problem, cap, 512)
            .map_err(|er| format!("instance {i} oracle: {er}"))?
            .ok_or_else(|| format!("instance {i}: oracle found no feasible grid point"))?;
        let gap = (sol.value - oracle).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-4 {
            return fail(format!(
                "instance {i} ({} assets): solver {:.10} vs dense-grid oracle {oracle:.10}",
                assets, sol.value
            ));
        }
    }

    // Frontier shape on an arithmetic cap grid.
    let problem = portfolio_instance(&sp, &qs, 3, 0, 0x9FF)?;
    let (lo, hi) = problem
        .asset_log_means()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| (a.min(m), b.max(m)));
    let caps: Vec<f64> = (0..11).map(|k| lo + (0.05 + 0.09 * k as f64) * (hi - lo)).collect();
    let points =
        efficient_frontier(&problem, &caps, &cfg).map_err(|er| format!("frontier: {er}"))?;
    let shape = check_frontier_shape(&points, 1e-6);
    if !shape.holds() {
        return fail(format!(
            "frontier shape violated: monotone gap {:.2e}, quasi-convexity gap {:.2e}",
            shape.worst_monotone_violation, shape.worst_quasi_convex_violation
        ));
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() >= 60.0 {
        return fail(format!("portfolio checks took {:?}, budget is 60 s", elapsed));
    }
    Ok(format!(
        "10 instances within {worst_gap:.2e} of the 1/512 oracle; frontier monotone \
         (gap {:.1e}) and quasi-convex (gap {:.1e}); {:.1} s",
        shape.worst_monotone_violation,
        shape.worst_quasi_convex_violation,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 10. Rebalancing convergence rate and the geometric-mixture inequality
// ---------------------------------------------------------------------------

fn criterion_10() -> Verdict {
    // Fixed four-period, three-asset return panel.
    let returns = GrossReturns::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            vec![1.10, 0.92, 1.04],
            vec![0.97, 1.15, 0.97],
            vec![1.03, 0.88, 1.09],
            vec![0.97, 1.12, 0.95],
        ],
    )
    .map_err(|er| er.to_string())?;
    let weights = [0.5, 0.3, 0.2];
    let w0 = 100.0;
    let limit = *wealth_rebalanced_limit(w0, &weights, &returns)
        .map_err(|er| er.to_string())?
        .last()
        .expect("nonempty path");
    let err = |steps: usize| -> Result<f64, String> {
        let terminal = *wealth_rebalanced(w0, &weights, &returns, steps)
            .map_err(|er| er.to_string())?
            .last()
            .expect("nonempty path");
        Ok((terminal - limit).abs())
    };
    let e100 = err(100)?;
    let e1000 = err(1000)?;
    let ratio = e100 / e1000;
    if !(8.0..=12.0).contains(&ratio) {
        return fail(format!(
            "error ratio err(100)/err(1000) = {ratio:.3} outside [8, 12] \
             (err100 = {e100:.3e}, err1000 = {e1000:.3e})"
        ));
    }

    // Geometric mixtures of terminal wealths stay below the worse leg under
    // a worst-case geometric mean with zero penalties.
    let sp = ProbSpace::uniform(3);
    let qs = two_scenarios(&sp);
    let spec = MeasureSpec {
        family: geomrisk_core::measures::MeasureFamily::Logconvex { penalties: vec![0.0, 0.0] },
        side: geomrisk_core::correspondence::Side::Return,
    };
    let measure = spec.bind(&sp, Some(&qs)).map_err(|er| er.to_string())?;
    let pairs =
        sampled_wealth_pairs(&sp, 200, 0xCA, (-2.0, 2.0)).map_err(|er| er.to_string())?;
    let report =
        check_diversification_inequalities(&measure, &pairs, 1e-9).map_err(|er| er.to_string())?;
    if !report.rebalanced_holds {
        return fail(format!(
            "geometric-mixture inequality violated on pair {:?} (gap {:.2e})",
            report.first_rebalanced_violation, report.worst_rebalanced_gap
        ));
    }
    Ok(format!(
        "convergence ratio {ratio:.2} in [8, 12]; geometric-mixture inequality holds on \
         200 pairs (worst slack gap {:.1e})",
        report.worst_rebalanced_gap
    ))
}

// ---------------------------------------------------------------------------
// 11. Capital-allocation identities on seeded instances
// ---------------------------------------------------------------------------

fn criterion_11() -> Verdict {
    let sp = ProbSpace::uniform(3);
    let mut rng = ChaCha8Rng::seed_from_u64(0xCB);
    let step = acceptance_grid_step();
    let mut worst_coherent = 0.0_f64;
    let mut worst_self = 0.0_f64;
    for i in 0..50usize {
        // Fresh scenario set: reference plus a random unit-mean tilt.
        let mut d: Vec<f64> = (0..3).map(|_| (-1.0 + 2.0 * rng.gen::<f64>()).exp()).collect();
        let z: f64 = d.iter().zip(sp.probs()).map(|(di, p)| di * p).sum();
        d.iter_mut().for_each(|v| *v /= z);
        let qs = ScenarioSet::new(vec![
            Scenario::reference(sp.clone()),
            Scenario::new(sp.clone(), d).map_err(|er| er.to_string())?,
        ])
        .map_err(|er| er.to_string())?;
        let mut draw = || -> PositivePosition {
            let vals: Vec<f64> =
                (0..3).map(|_| (-2.0 + 4.0 * rng.gen::<f64>()).exp()).collect();
            PositivePosition::new(sp.clone(), vals).expect("positive")
        };
        let unit = draw();
        let total = draw();

        let coherent = DualMeasure::new(
            RFunctional::new(RFunctionalSpec::Coherent).map_err(|er| er.to_string())?,
            qs.clone(),
        )
        .map_err(|er| er.to_string())?;
        let total_value = coherent.eval(&total).map_err(|er| er.to_string())?;
        let prop = car_proportional(&coherent, &unit, &total).map_err(|er| er.to_string())?;
        let sub = car_subdifferential(&coherent, &unit, &total).map_err(|er| er.to_string())?;
        let gap = ((prop - sub) / total_value).abs();
        worst_coherent = worst_coherent.max(gap);
        if gap > 1e-10 {
            return fail(format!(
                "instance {i}: normalized proportional {:.15e} vs subdifferential/total \
                 {:.15e}",
                prop / total_value,
                sub / total_value
            ));
        }

        // Self-allocation returns the measure whenever the transform is
        // zero at zero.
        for spec in [
            RFunctionalSpec::Coherent,
            RFunctionalSpec::SupqPenalty { base_penalties: vec![0.2, 0.5] },
            RFunctionalSpec::MeanValue { transform: LossTransform::PiecewiseQuadratic },
        ] {
            let dm = DualMeasure::new(
                RFunctional::new(spec.clone()).map_err(|er| er.to_string())?,
                qs.clone(),
            )
            .map_err(|er| er.to_string())?;
            let value = dm.eval(&total).map_err(|er| er.to_string())?;
            let diag = car_proportional(&dm, &total, &total).map_err(|er| er.to_string())?;
            let gap = (diag - value).abs();
            worst_self = worst_self.max(gap);
            if gap > 1e-10 {
                return fail(format!(
                    "instance {i} {spec:?}: self-allocation {diag:.15e} vs measure {value:.15e}"
                ));
            }
        }

        let acc = car_acceptance(&coherent, &unit, &total).map_err(|er| er.to_string())?;
        if !(acc >= sub / (1.0 + 1e-9) && acc <= sub * step * (1.0 + 1e-9)) {
            return fail(format!(
                "instance {i}: acceptance rule {acc:.12e} not within one grid step above \
                 subdifferential {sub:.12e}"
            ));
        }
    }
    Ok(format!(
        "50 instances: coherent identity gap {worst_coherent:.2e}, self-allocation gap \
         {worst_self:.2e}, acceptance rule within one grid step throughout"
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: Vec<(usize, &str, fn() -> Verdict)> = vec![
        (1, "arithmetic-mixture counterexample", criterion_1),
        (2, "scaling counterexample", criterion_2),
        (3, "exp/log round trip", criterion_3),
        (4, "paired property verdicts", criterion_4),
        (5, "dual building-block equivalence", criterion_5),
        (6, "transform recovery vs dense scan", criterion_6),
        (7, "law-invariant envelope", criterion_7),
        (8, "acceptance-family round trip", criterion_8),
        (9, "portfolio solver vs dense oracle", criterion_9),
        (10, "rebalancing convergence and mixtures", criterion_10),
        (11, "capital-allocation identities", criterion_11),
    ];
    let mut failures = 0;
    for (number, name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run));
        match outcome {
            Ok(Ok(detail)) => println!("PASS criterion {number}: {name} — {detail}"),
            Ok(Err(detail)) => {
                failures += 1;
                println!("FAIL criterion {number}: {name} — {detail}");
            }
            Err(panic) => {
                failures += 1;
                let msg = panic
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| panic.downcast_ref::<&str>().copied())
                    .unwrap_or("panicked");
                println!("FAIL criterion {number}: {name} — panicked: {msg}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} of 11 criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
