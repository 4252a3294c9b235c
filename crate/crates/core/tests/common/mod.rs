//! Independent oracles for the release gate.
//!
//! Everything here recomputes reference values from first principles —
//! dense grids, exhaustive enumeration, sorted rearrangements — without
//! reusing the library's own shortcut routes, so a gate pass means two
//! genuinely different computations agreed.

use std::sync::Arc;

use geomrisk_core::duality::DualMeasure;
use geomrisk_core::portfolio::PortfolioProblem;
use geomrisk_core::prob::{PositivePosition, ProbSpace, Scenario};
use geomrisk_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded batch of strictly positive positions with log-values uniform on
/// `[lo, hi]`.
pub fn seeded_positives(
    space: &Arc<ProbSpace>,
    count: usize,
    seed: u64,
    lo: f64,
    hi: f64,
) -> Vec<PositivePosition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let vals: Vec<f64> =
                (0..space.len()).map(|_| (lo + (hi - lo) * rng.gen::<f64>()).exp()).collect();
            PositivePosition::new(space.clone(), vals).expect("positive by construction")
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm, iterative.
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Exhaustive supremum of the dual measure over all atom permutations of
/// the position. On an equiprobable space every permutation has the same
/// distribution, so this is the brute-force law-invariant envelope.
pub fn permutation_sup(dm: &DualMeasure, x: &PositivePosition) -> Result<f64> {
    let n = x.space().len();
    assert!(x.space().is_equiprobable(), "permutation oracle needs equal atom weights");
    assert!(n <= 8, "factorial enumeration kept small on purpose");
    let vals = x.values();
    let mut best = f64::NEG_INFINITY;
    for perm in permutations(n) {
        let permuted: Vec<f64> = perm.iter().map(|&i| vals[i]).collect();
        let y = PositivePosition::new(x.space().clone(), permuted)?;
        best = best.max(dm.eval(&y)?);
    }
    Ok(best)
}

/// Rearrangement bound computed directly from sorted values: on an
/// equiprobable `n`-atom space, the largest scenario mean any reordering of
/// `z` can reach is `(1/n) * sum_i sorted(z)_i * sorted(d)_i` with both
/// vectors ascending.
pub fn sorted_products_mean(z: &[f64], density: &[f64]) -> f64 {
    let n = z.len();
    let mut zs = z.to_vec();
    let mut ds = density.to_vec();
    zs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    ds.sort_by(|a, b| a.partial_cmp(b).expect("finite density"));
    zs.iter().zip(&ds).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Dense boundary scan for the scenario-mean transform of a dual measure on
/// a two-atom space: minimizes `log trho(exp u)` over log-positions `u` in
/// the box `[-bound, bound]^2` with `E_Q[u] = t`. The measure is monotone,
/// so the constrained infimum over `E_Q[u] >= t` sits on this slice; the
/// slice is swept in `u_1` with the stated step and `u_2` solved from the
/// constraint.
pub fn boundary_scan_log_min(
    dm: &DualMeasure,
    t: f64,
    q: &Scenario,
    bound: f64,
    step: f64,
) -> Result<f64> {
    let space = dm.scenarios().space().clone();
    assert_eq!(space.len(), 2, "scan oracle is written for two atoms");
    let (w1, w2) = (q.weight(0), q.weight(1));
    assert!(w1 > 0.0 && w2 > 0.0, "scan oracle needs full-support scenarios");
    let mut best = f64::INFINITY;
    let steps = ((2.0 * bound) / step).round() as usize;
    for k in 0..=steps {
        let u1 = -bound + k as f64 * step;
        let u2 = (t - w1 * u1) / w2;
        if u2.abs() > bound {
            continue;
        }
        let y = PositivePosition::new(space.clone(), vec![u1.exp(), u2.exp()])?;
        best = best.min(dm.eval(&y)?.ln());
    }
    assert!(best.is_finite(), "scan found no feasible point: widen the box or move t");
    Ok(best)
}

/// Dense simplex-grid minimum of the portfolio objective under the
/// expected-log-return cap: every weight vector with coordinates `k/denom`
/// summing to one is tried, feasibility checked with the same slack the
/// solver uses, and the best objective returned (`None` when no grid point
/// is feasible). Written for two and three assets.
pub fn dense_simplex_min(
    problem: &PortfolioProblem,
    cap: f64,
    denom: usize,
) -> Result<Option<f64>> {
    let n = problem.assets();
    let mut best: Option<f64> = None;
    let mut consider = |w: Vec<f64>| -> Result<()> {
        if problem.expected_log_return(&w) <= cap + 1e-12 {
            let v = problem.objective(&w)?;
            best = Some(match best {
                Some(b) => b.min(v),
                None => v,
            });
        }
        Ok(())
    };
    match n {
        2 => {
            for i in 0..=denom {
                let a = i as f64 / denom as f64;
                consider(vec![a, 1.0 - a])?;
            }
        }
        3 => {
            for i in 0..=denom {
                for j in 0..=(denom - i) {
                    let k = denom - i - j;
                    consider(vec![
                        i as f64 / denom as f64,
                        j as f64 / denom as f64,
                        k as f64 / denom as f64,
                    ])?;
                }
            }
        }
        _ => panic!("dense simplex oracle is written for two or three assets"),
    }
    Ok(best)
}
