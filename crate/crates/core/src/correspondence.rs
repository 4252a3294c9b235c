//! The monetary/geometric correspondence and sampled property checking.
//!
//! A monetary functional `rho` and a geometric functional `trho` are linked
//! by `trho(X) = exp(rho(log X))` and `rho(Z) = log(trho(exp Z))`, with the
//! conventions `exp(-inf) = 0` and `log 0 = -inf`. Under this bijection,
//! properties translate pairwise:
//!
//! | monetary side            | geometric side              |
//! |--------------------------|------------------------------|
//! | `rho(0) = 0`             | `trho(1) = 1`                |
//! | monotone                 | monotone                     |
//! | translation invariant    | positively homogeneous       |
//! | positively homogeneous   | constant multiplicative      |
//! | subadditive              | submultiplicative            |
//! | convex                   | logconvex                    |
//! | cash superadditive       | star-shaped                  |
//! | quasi-convex             | quasi-logconvex              |
//!
//! [`check_property`] verifies a single property by seeded sampling;
//! [`bridge_equivalences`] runs each paired check on both sides and demands
//! verdict agreement. Paired checks deliberately consume identical random
//! draws (the geometric sampler exponentiates the monetary one), so their
//! verdicts can only diverge if the correspondence itself is broken —
//! never because the two sides saw different positions.
//!
//! Sampled verdicts use two thresholds: a violation needs a relative margin
//! above `tolerance` to be noticed at all, and above `confirm_margin` to
//! flip the verdict. Margins in between are treated as floating-point noise
//! rather than counterexamples.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::prob::{require_same_space, Position, PositivePosition, ProbSpace};
use crate::{rel_gap, Error, Result};

/// Which side of the correspondence a functional lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Acts on arbitrary positions; prices risk in cash units.
    Monetary,
    /// Acts on strictly positive positions; prices risk multiplicatively.
    Return,
}

/// A risk functional over a fixed probability space.
///
/// Evaluation returns extended reals (`±inf` allowed); geometric-side
/// functionals reject positions with nonpositive entries.
#[derive(Clone)]
pub struct RiskFunctional {
    side: Side,
    space: Arc<ProbSpace>,
    label: String,
    eval: Arc<dyn Fn(&Position) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for RiskFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiskFunctional")
            .field("side", &self.side)
            .field("label", &self.label)
            .field("atoms", &self.space.len())
            .finish()
    }
}

impl RiskFunctional {
    pub fn monetary(
        space: Arc<ProbSpace>,
        label: impl Into<String>,
        eval: impl Fn(&Position) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        RiskFunctional { side: Side::Monetary, space, label: label.into(), eval: Arc::new(eval) }
    }

    pub fn geometric(
        space: Arc<ProbSpace>,
        label: impl Into<String>,
        eval: impl Fn(&Position) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        RiskFunctional { side: Side::Return, space, label: label.into(), eval: Arc::new(eval) }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates at a position over the same space.
    ///
    /// # Errors
    ///
    /// Space mismatches, nonpositive entries for geometric-side
    /// functionals, and any error from the underlying measure surface
    /// unchanged — no silent NaN.
    pub fn eval(&self, x: &Position) -> Result<f64> {
        require_same_space(&self.space, x.space(), &format!("evaluating {}", self.label))?;
        if self.side == Side::Return {
            if let Some((i, v)) = x.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(Error::InvalidPosition(format!(
                    "geometric-side functional {} needs strictly positive values; \
                     got {v} at outcome index {i}",
                    self.label
                )));
            }
        }
        (self.eval)(x)
    }

    /// Convenience for validated positive positions.
    pub fn eval_positive(&self, x: &PositivePosition) -> Result<f64> {
        self.eval(x.as_position())
    }

    /// The geometric image `X -> exp(rho(log X))` of a monetary functional.
    pub fn to_return(&self) -> Result<RiskFunctional> {
        if self.side != Side::Monetary {
            return Err(Error::Precondition(format!(
                "to_return needs a monetary functional, {} is geometric",
                self.label
            )));
        }
        let inner = self.eval.clone();
        let space = self.space.clone();
        Ok(RiskFunctional::geometric(
            self.space.clone(),
            format!("geom({})", self.label),
            move |x: &Position| {
                let logs = Position::new(space.clone(), x.values().iter().map(|v| v.ln()).collect())?;
                Ok(inner(&logs)?.exp())
            },
        ))
    }

    /// The monetary image `Z -> log(trho(exp Z))` of a geometric functional.
    pub fn to_monetary(&self) -> Result<RiskFunctional> {
        if self.side != Side::Return {
            return Err(Error::Precondition(format!(
                "to_monetary needs a geometric functional, {} is monetary",
                self.label
            )));
        }
        let inner = self.eval.clone();
        let space = self.space.clone();
        Ok(RiskFunctional::monetary(
            self.space.clone(),
            format!("cash({})", self.label),
            move |z: &Position| {
                let exps =
                    Position::new(space.clone(), z.values().iter().map(|v| v.exp()).collect())?;
                Ok(inner(&exps)?.ln())
            },
        ))
    }

    /// The functional viewed on the requested side, converting if needed.
    pub fn on_side(&self, side: Side) -> Result<RiskFunctional> {
        match (self.side, side) {
            (Side::Monetary, Side::Monetary) | (Side::Return, Side::Return) => Ok(self.clone()),
            (Side::Monetary, Side::Return) => self.to_return(),
            (Side::Return, Side::Monetary) => self.to_monetary(),
        }
    }
}

// ---------------------------------------------------------------------------
// Property checking
// ---------------------------------------------------------------------------

/// Properties a functional may satisfy. Scaling/power properties
/// (`ConstantMultiplicative`, `Submultiplicative`, `Logconvex`,
/// `StarShaped`, `QuasiLogconvex`) are geometric-side only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// `rho(0) = 0` (monetary) or `trho(1) = 1` (geometric); deterministic.
    Normalized,
    Monotone,
    TranslationInvariant,
    PositivelyHomogeneous,
    Convex,
    Subadditive,
    QuasiConvex,
    CashSubadditive,
    CashSuperadditive,
    ConstantMultiplicative,
    Submultiplicative,
    /// The power-mixture inequality
    /// `trho(X^a Y^(1-a)) <= trho(X)^a trho(Y)^(1-a)` alone; the full
    /// logconvexity flag in [`TaxonomyClass`] additionally requires
    /// monotonicity and positive homogeneity.
    Logconvex,
    StarShaped,
    QuasiLogconvex,
    LawInvariant,
}

impl Property {
    fn geometric_only(self) -> bool {
        matches!(
            self,
            Property::ConstantMultiplicative
                | Property::Submultiplicative
                | Property::Logconvex
                | Property::StarShaped
                | Property::QuasiLogconvex
        )
    }
}

/// Configuration for sampled property checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Sample count per property (default 500).
    pub samples: usize,
    /// Relative margin below which a comparison counts as satisfied.
    pub tolerance: f64,
    /// Relative margin a violation must exceed to flip the verdict;
    /// margins between `tolerance` and this are treated as noise.
    pub confirm_margin: f64,
    pub seed: u64,
    /// Positions are sampled with log-values uniform on this interval.
    pub log_range: (f64, f64),
}

impl CheckConfig {
    pub fn seeded(seed: u64) -> Self {
        CheckConfig {
            samples: 500,
            tolerance: 1e-9,
            confirm_margin: 1e-7,
            seed,
            log_range: (-3.0, 3.0),
        }
    }
}

/// A confirmed counterexample: inputs plus both sides of the failed
/// comparison. Replaying the inputs through the functional reproduces a
/// violation whose margin exceeds the check tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub sample_index: usize,
    /// First position (values over the outcomes).
    pub x: Vec<f64>,
    /// Second position for pairwise properties.
    pub y: Option<Vec<f64>>,
    /// Scalar parameter (shift, scale, or mixture weight) if the property
    /// has one.
    pub scalar: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative violation margin `(lhs - rhs) / max(1, |lhs|, |rhs|)`.
    pub margin: f64,
}

/// Outcome of checking one property on one functional.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub property: Property,
    pub side: Side,
    pub holds: bool,
    pub samples: usize,
    pub tolerance: f64,
    pub confirm_margin: f64,
    /// Largest relative violation margin observed (0 when none).
    pub max_violation: f64,
    /// Present exactly when `holds` is false.
    pub counterexample: Option<Counterexample>,
}

/// Per-sample comparison: either `lhs <= rhs` or `lhs = rhs`.
enum Relation {
    Leq,
    Eq,
}

struct Trial {
    lhs: f64,
    rhs: f64,
    relation: Relation,
    x: Vec<f64>,
    y: Option<Vec<f64>>,
    scalar: Option<f64>,
}

/// Uniform draw layout consumed by every sampled property: two unit vectors
/// and two unit scalars per sample. A fixed layout keeps paired monetary
/// and geometric checks on identical random streams; the second scalar is
/// drawn (to keep the stream layout fixed) even by properties that only
/// need one.
struct Draws {
    u: Vec<f64>,
    v: Vec<f64>,
    a: f64,
}

fn draw(rng: &mut ChaCha8Rng, n: usize) -> Draws {
    let u = (0..n).map(|_| rng.gen::<f64>()).collect();
    let v = (0..n).map(|_| rng.gen::<f64>()).collect();
    let a = rng.gen::<f64>();
    let _b = rng.gen::<f64>();
    Draws { u, v, a }
}

/// Paired properties share a stream id so both sides of a lemma bridge see
/// the same draws: translation invariance pairs with positive homogeneity,
/// monetary homogeneity with constant multiplicativity, subadditivity with
/// submultiplicativity, convexity with logconvexity, cash superadditivity
/// with star-shapedness, and quasi-convexity with quasi-logconvexity.
fn stream_id(property: Property, side: Side) -> u64 {
    use Property::*;
    match (property, side) {
        (Monotone, _) => 1,
        (TranslationInvariant, Side::Monetary) | (PositivelyHomogeneous, Side::Return) => 2,
        (PositivelyHomogeneous, Side::Monetary) | (ConstantMultiplicative, Side::Return) => 3,
        (Subadditive, Side::Monetary) | (Submultiplicative, Side::Return) => 4,
        (Convex, Side::Monetary) | (Logconvex, Side::Return) => 5,
        (CashSuperadditive, Side::Monetary) | (StarShaped, Side::Return) => 6,
        (QuasiConvex, Side::Monetary) | (QuasiLogconvex, Side::Return) => 7,
        (CashSubadditive, _) => 8,
        (LawInvariant, _) => 9,
        (Normalized, _) => 10,
        (TranslationInvariant, Side::Return) => 11,
        (Subadditive, Side::Return) => 12,
        (Convex, Side::Return) => 13,
        (QuasiConvex, Side::Return) => 14,
        (CashSuperadditive, Side::Return) => 15,
        (ConstantMultiplicative, Side::Monetary) => 16,
        (Submultiplicative, Side::Monetary) => 17,
        (Logconvex, Side::Monetary) => 18,
        (StarShaped, Side::Monetary) => 19,
        (QuasiLogconvex, Side::Monetary) => 20,
    }
}

fn affine(unit: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    unit.iter().map(|t| lo + (hi - lo) * t).collect()
}

/// Groups atom indices by equal reference probability; a law-preserving
/// permutation may only shuffle within groups.
fn equal_prob_groups(space: &ProbSpace) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.probs()[a].partial_cmp(&space.probs()[b]).expect("finite"));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if (space.probs()[g[0]] - space.probs()[i]).abs() <= 1e-12 => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Checks one property of `f` by seeded sampling.
///
/// Every property is checked on `f` as given. Power/scale properties
/// (constant multiplicativity, submultiplicativity, logconvexity,
/// star-shapedness, quasi-logconvexity) quantify over strictly positive
/// positions, so their samples are exponentiated regardless of side: on a
/// monetary functional they describe its restriction to positive positions.
///
/// # Errors
///
/// Measure evaluation errors surface unchanged.
pub fn check_property(f: &RiskFunctional, property: Property, cfg: &CheckConfig) -> Result<PropertyCheck> {
    let n = f.space().len();
    let space = f.space().clone();
    let (lo, hi) = cfg.log_range;
    let geometric = f.side() == Side::Return;
    let positive = geometric || property.geometric_only();

    // Positions enter the functional as raw log-values on the monetary side
    // and exponentiated for geometric functionals and for power/scale
    // properties, from the same draws.
    let position = |unit: &[f64]| -> Result<Position> {
        let logs = affine(unit, lo, hi);
        let vals = if positive { logs.iter().map(|t| t.exp()).collect() } else { logs };
        Position::new(space.clone(), vals)
    };

    if property == Property::Normalized {
        let base = if geometric { 1.0 } else { 0.0 };
        let x = Position::constant(space.clone(), base)?;
        let got = f.eval(&x)?;
        let margin = rel_gap(got, base).abs();
        let holds = margin <= cfg.tolerance;
        return Ok(PropertyCheck {
            property,
            side: f.side(),
            holds,
            samples: 1,
            tolerance: cfg.tolerance,
            confirm_margin: cfg.confirm_margin,
            max_violation: if holds { 0.0 } else { margin },
            counterexample: if holds {
                None
            } else {
                Some(Counterexample {
                    sample_index: 0,
                    x: x.values().to_vec(),
                    y: None,
                    scalar: None,
                    lhs: got,
                    rhs: base,
                    margin,
                })
            },
        });
    }

    let groups = equal_prob_groups(f.space());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ stream_id(property, f.side()));
    let mut max_violation = 0.0_f64;
    let mut worst: Option<Counterexample> = None;

    for i in 0..cfg.samples {
        let d = draw(&mut rng, n);
        let trial = run_trial(f, property, &d, &position, &groups)?;
        let margin = match trial.relation {
            Relation::Leq => rel_gap(trial.lhs, trial.rhs),
            Relation::Eq => rel_gap(trial.lhs, trial.rhs).abs(),
        };
        if margin > max_violation {
            max_violation = margin;
            worst = Some(Counterexample {
                sample_index: i,
                x: trial.x,
                y: trial.y,
                scalar: trial.scalar,
                lhs: trial.lhs,
                rhs: trial.rhs,
                margin,
            });
        }
    }

    let holds = max_violation <= cfg.confirm_margin;
    Ok(PropertyCheck {
        property,
        side: f.side(),
        holds,
        samples: cfg.samples,
        tolerance: cfg.tolerance,
        confirm_margin: cfg.confirm_margin,
        max_violation: if max_violation > cfg.tolerance { max_violation } else { 0.0 },
        counterexample: if holds { None } else { worst },
    })
}

fn run_trial(
    f: &RiskFunctional,
    property: Property,
    d: &Draws,
    position: &impl Fn(&[f64]) -> Result<Position>,
    groups: &[Vec<usize>],
) -> Result<Trial> {
    let geometric = f.side() == Side::Return;
    let x = position(&d.u)?;
    match property {
        Property::Monotone => {
            // Y dominates X by a nonnegative bump of the log-values.
            let bumped: Vec<f64> = d.u.iter().zip(&d.v).map(|(u, v)| (u + 0.3 * v).min(1.0)).collect();
            let y = position(&bumped)?;
            Ok(Trial {
                lhs: f.eval(&x)?,
                rhs: f.eval(&y)?,
                relation: Relation::Leq,
                x: x.values().to_vec(),
                y: Some(y.values().to_vec()),
                scalar: None,
            })
        }
        Property::TranslationInvariant | Property::CashSubadditive | Property::CashSuperadditive => {
            // Cash shifts. On the geometric side the shift must keep the
            // position positive, so its lower end adapts to min X.
            let h = match property {
                Property::TranslationInvariant => {
                    if geometric {
                        let min = x.values().iter().cloned().fold(f64::INFINITY, f64::min);
                        -0.9 * min + (2.0 + 0.9 * min) * d.a
                    } else {
                        -2.0 + 4.0 * d.a
                    }
                }
                _ => 2.0 * d.a, // cash sub/superadditivity quantify over h >= 0
            };
            let shifted = x.shift(h)?;
            let (lhs, rhs, relation) = match property {
                Property::TranslationInvariant => (f.eval(&shifted)?, f.eval(&x)? + h, Relation::Eq),
                Property::CashSubadditive => (f.eval(&shifted)?, f.eval(&x)? + h, Relation::Leq),
                Property::CashSuperadditive => (f.eval(&x)? + h, f.eval(&shifted)?, Relation::Leq),
                _ => unreachable!(),
            };
            Ok(Trial { lhs, rhs, relation, x: x.values().to_vec(), y: None, scalar: Some(h) })
        }
        Property::PositivelyHomogeneous => {
            let lambda = (-2.0 + 4.0 * d.a).exp();
            Ok(Trial {
                lhs: f.eval(&x.scale(lambda)?)?,
                rhs: lambda * f.eval(&x)?,
                relation: Relation::Eq,
                x: x.values().to_vec(),
                y: None,
                scalar: Some(lambda),
            })
        }
        Property::ConstantMultiplicative => {
            // Pairs with monetary positive homogeneity: the exponent plays
            // the role of the scale factor.
            let alpha = (-2.0 + 4.0 * d.a).exp();
            let powered = x.map(|v| v.powf(alpha))?;
            Ok(Trial {
                lhs: f.eval(&powered)?,
                rhs: f.eval(&x)?.powf(alpha),
                relation: Relation::Eq,
                x: x.values().to_vec(),
                y: None,
                scalar: Some(alpha),
            })
        }
        Property::Subadditive | Property::Submultiplicative => {
            let y = position(&d.v)?;
            let (combined, rhs) = if property == Property::Subadditive {
                (x.add(&y)?, f.eval(&x)? + f.eval(&y)?)
            } else {
                let prod = Position::new(
                    x.space().clone(),
                    x.values().iter().zip(y.values()).map(|(a, b)| a * b).collect(),
                )?;
                (prod, f.eval(&x)? * f.eval(&y)?)
            };
            Ok(Trial {
                lhs: f.eval(&combined)?,
                rhs,
                relation: Relation::Leq,
                x: x.values().to_vec(),
                y: Some(y.values().to_vec()),
                scalar: None,
            })
        }
        Property::Convex | Property::QuasiConvex | Property::Logconvex | Property::QuasiLogconvex => {
            let y = position(&d.v)?;
            let alpha = d.a.clamp(0.01, 0.99);
            let mix = match property {
                Property::Convex | Property::QuasiConvex => Position::new(
                    x.space().clone(),
                    x.values()
                        .iter()
                        .zip(y.values())
                        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                        .collect(),
                )?,
                _ => Position::new(
                    x.space().clone(),
                    x.values()
                        .iter()
                        .zip(y.values())
                        .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
                        .collect(),
                )?,
            };
            let (fx, fy) = (f.eval(&x)?, f.eval(&y)?);
            let rhs = match property {
                Property::Convex => alpha * fx + (1.0 - alpha) * fy,
                Property::Logconvex => fx.powf(alpha) * fy.powf(1.0 - alpha),
                Property::QuasiConvex | Property::QuasiLogconvex => fx.max(fy),
                _ => unreachable!(),
            };
            Ok(Trial {
                lhs: f.eval(&mix)?,
                rhs,
                relation: Relation::Leq,
                x: x.values().to_vec(),
                y: Some(y.values().to_vec()),
                scalar: Some(alpha),
            })
        }
        Property::StarShaped => {
            // lambda >= 1: scaling up scales the measure at least linearly.
            let lambda = (2.0 * d.a).exp();
            Ok(Trial {
                lhs: lambda * f.eval(&x)?,
                rhs: f.eval(&x.scale(lambda)?)?,
                relation: Relation::Leq,
                x: x.values().to_vec(),
                y: None,
                scalar: Some(lambda),
            })
        }
        Property::LawInvariant => {
            // Permute values within equal-probability groups; the permuted
            // position has the same distribution.
            let mut perm: Vec<usize> = (0..d.u.len()).collect();
            for g in groups {
                let mut keyed: Vec<usize> = g.clone();
                keyed.sort_by(|&a, &b| d.v[a].partial_cmp(&d.v[b]).expect("finite draw"));
                for (slot, &src) in g.iter().zip(&keyed) {
                    perm[*slot] = src;
                }
            }
            let shuffled =
                Position::new(x.space().clone(), perm.iter().map(|&j| x.values()[j]).collect())?;
            Ok(Trial {
                lhs: f.eval(&shuffled)?,
                rhs: f.eval(&x)?,
                relation: Relation::Eq,
                x: x.values().to_vec(),
                y: Some(shuffled.values().to_vec()),
                scalar: None,
            })
        }
        Property::Normalized => unreachable!("handled before sampling"),
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Property flags for one functional, every flag checked on its own side.
/// `coherent` means monotone, translation invariant, positively
/// homogeneous, and subadditive at arithmetic scale; `logconvex` is the
/// full geometric notion (monotone, positively homogeneous, and
/// power-mixture convex). A geometric functional can satisfy the geometric
/// flags while failing all the arithmetic-scale ones, and vice versa.
#[derive(Debug, Clone, Serialize)]
pub struct TaxonomyClass {
    pub monetary: bool,
    #[serde(rename = "return")]
    pub return_measure: bool,
    pub coherent: bool,
    pub convex: bool,
    pub logconvex: bool,
    pub quasi_convex: bool,
    pub quasi_logconvex: bool,
    pub star_shaped: bool,
    pub cash_subadditive: bool,
    pub cash_superadditive: bool,
    pub constant_multiplicative: bool,
    pub submultiplicative: bool,
    pub law_invariant: bool,
}

/// Classifier output: the flag summary plus every underlying check.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: String,
    pub taxonomy: TaxonomyClass,
    pub checks: Vec<PropertyCheck>,
}

/// Runs the full battery of property checks on `f` — on its own side, with
/// no conversion — and reduces them to a [`TaxonomyClass`].
///
/// Arithmetic-scale properties (translation invariance, subadditivity,
/// convexity, quasi-convexity, cash sub/superadditivity) are sampled on the
/// functional's native domain; power/scale properties are sampled on
/// strictly positive positions on either side. Normalization anchors at the
/// native unit: `f(0) = 0` for a monetary functional, `f(1) = 1` for a
/// geometric one. The `monetary` flag is monotone ∧ translation-invariant ∧
/// normalized, so a geometric functional that is not cash-additive (e.g. a
/// tail average of returns) is *not* flagged monetary even though its
/// log-scale image is.
///
/// Implication closure is enforced by re-sampling: if a stronger flag holds
/// but a weaker one failed (coherent without convex, convex without
/// quasi-convex, logconvex without quasi-logconvex, convex-and-normalized
/// without star-shaped), the failing check is re-run at four times the
/// sample count and its verdict replaced. Genuine counterexamples survive
/// the re-run; sampling flukes do not.
pub fn classify(f: &RiskFunctional, cfg: &CheckConfig) -> Result<Classification> {
    let mut checks: Vec<PropertyCheck> = Vec::new();
    let mut run = |p: Property, c: &CheckConfig| -> Result<bool> {
        let r = check_property(f, p, c)?;
        let holds = r.holds;
        checks.push(r);
        Ok(holds)
    };

    let norm = run(Property::Normalized, cfg)?;
    let mono = run(Property::Monotone, cfg)?;
    let ti = run(Property::TranslationInvariant, cfg)?;
    let ph = run(Property::PositivelyHomogeneous, cfg)?;
    let subadd = run(Property::Subadditive, cfg)?;
    let mut convex = run(Property::Convex, cfg)?;
    let mut quasi_convex = run(Property::QuasiConvex, cfg)?;
    let cash_sub = run(Property::CashSubadditive, cfg)?;
    let cash_super = run(Property::CashSuperadditive, cfg)?;
    let law_inv = run(Property::LawInvariant, cfg)?;

    let cm = run(Property::ConstantMultiplicative, cfg)?;
    let smult = run(Property::Submultiplicative, cfg)?;
    let lcvx_ineq = run(Property::Logconvex, cfg)?;
    let mut quasi_logconvex = run(Property::QuasiLogconvex, cfg)?;
    let mut star = run(Property::StarShaped, cfg)?;

    let coherent = mono && ti && ph && subadd;
    let logconvex = mono && ph && lcvx_ineq;

    // Implication closure with 4x re-runs on inconsistency.
    let big = CheckConfig { samples: cfg.samples * 4, ..cfg.clone() };
    if coherent && !convex {
        convex = run(Property::Convex, &big)?;
    }
    if convex && !quasi_convex {
        quasi_convex = run(Property::QuasiConvex, &big)?;
    }
    if logconvex && !quasi_logconvex {
        quasi_logconvex = run(Property::QuasiLogconvex, &big)?;
    }
    if convex && norm && !star {
        star = run(Property::StarShaped, &big)?;
    }

    Ok(Classification {
        label: f.label().to_string(),
        taxonomy: TaxonomyClass {
            monetary: mono && ti && norm,
            return_measure: mono && ph && norm,
            coherent,
            convex,
            logconvex,
            quasi_convex,
            quasi_logconvex,
            star_shaped: star,
            cash_subadditive: cash_sub,
            cash_superadditive: cash_super,
            constant_multiplicative: cm,
            submultiplicative: smult,
            law_invariant: law_inv,
        },
        checks,
    })
}

// ---------------------------------------------------------------------------
// Bridge equivalences
// ---------------------------------------------------------------------------

/// One paired verdict: a monetary property against its geometric image.
#[derive(Debug, Clone, Serialize)]
pub struct BridgePair {
    /// Short tag for the equivalence being exercised (e.g. `"ti<->ph"`).
    pub tag: String,
    pub monetary_property: Property,
    pub return_property: Property,
    pub monetary_holds: bool,
    pub return_holds: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub pairs: Vec<BridgePair>,
    pub all_agree: bool,
}

/// Verifies that each property bridge gives the same verdict on both sides
/// of the correspondence.
///
/// `rho` must be monetary and `trho` its geometric image (spot-checked at a
/// few positions before sampling). Continuity along monotone sequences is
/// not listed: on a finite space both sides inherit it from the bridge
/// being exact, and a sampled check would be vacuous.
pub fn bridge_equivalences(
    rho: &RiskFunctional,
    trho: &RiskFunctional,
    cfg: &CheckConfig,
) -> Result<BridgeReport> {
    if rho.side() != Side::Monetary || trho.side() != Side::Return {
        return Err(Error::Precondition(
            "bridge_equivalences wants (monetary, geometric) in that order".into(),
        ));
    }
    require_same_space(rho.space(), trho.space(), "bridge check")?;
    // Spot-check that trho really is the geometric image of rho.
    let n = rho.space().len();
    for k in 0..3 {
        let logs: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * 0.37 + k as f64 * 0.61).sin()).collect();
        let z = Position::new(rho.space().clone(), logs.clone())?;
        let x = z.exp()?;
        let via_rho = rho.eval(&z)?.exp();
        let direct = trho.eval_positive(&x)?;
        if !crate::close_rel(via_rho, direct, 1e-9) {
            return Err(Error::Precondition(format!(
                "trho is not the geometric image of rho: exp(rho(log X)) = {via_rho:.12e} \
                 but trho(X) = {direct:.12e}"
            )));
        }
    }

    let table: [(&str, Property, Property); 8] = [
        ("normalized<->normalized", Property::Normalized, Property::Normalized),
        ("monotone<->monotone", Property::Monotone, Property::Monotone),
        ("ti<->ph", Property::TranslationInvariant, Property::PositivelyHomogeneous),
        ("ph<->const-mult", Property::PositivelyHomogeneous, Property::ConstantMultiplicative),
        ("subadd<->submult", Property::Subadditive, Property::Submultiplicative),
        ("convex<->logconvex", Property::Convex, Property::Logconvex),
        ("cash-super<->star", Property::CashSuperadditive, Property::StarShaped),
        ("quasi-convex<->quasi-logconvex", Property::QuasiConvex, Property::QuasiLogconvex),
    ];
    let mut pairs = Vec::with_capacity(table.len());
    for (tag, pm, pr) in table {
        let m = check_property(rho, pm, cfg)?;
        let r = check_property(trho, pr, cfg)?;
        pairs.push(BridgePair {
            tag: tag.to_string(),
            monetary_property: pm,
            return_property: pr,
            monetary_holds: m.holds,
            return_holds: r.holds,
            agree: m.holds == r.holds,
        });
    }
    let all_agree = pairs.iter().all(|p| p.agree);
    Ok(BridgeReport { pairs, all_agree })
}

// ---------------------------------------------------------------------------
// Built-in counterexamples
// ---------------------------------------------------------------------------

/// The arithmetic-mixture counterexample: a worst-case geometric mean is
/// quasi-logconvex but fails quasi-convexity on an explicit pair.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureCounterexample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub measure_x: f64,
    pub measure_y: f64,
    /// Measure of the arithmetic mixture `alpha X + (1-alpha) Y`.
    pub arithmetic_mixture_value: f64,
    /// Measure of the geometric mixture `X^alpha Y^(1-alpha)`.
    pub geometric_mixture_value: f64,
    /// `arithmetic_mixture_value - max(measure_x, measure_y)`; positive
    /// means quasi-convexity fails.
    pub quasi_convexity_violation: f64,
    /// `max(measure_x, measure_y) - geometric_mixture_value`; nonnegative
    /// means quasi-logconvexity holds on this pair.
    pub quasi_logconvexity_slack: f64,
}

/// The scaling counterexample: a geometric certainty equivalent with a
/// kinked convex transform is quasi-logconvex but not positively
/// homogeneous (it even fails the star-shape inequality below scale one).
#[derive(Debug, Clone, Serialize)]
pub struct ScalingCounterexample {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub measure_x: f64,
    /// Measure of the scaled position `lambda X`.
    pub measure_scaled: f64,
    /// `lambda * measure_x`, what homogeneity would predict.
    pub homogeneous_prediction: f64,
    /// `measure_scaled - homogeneous_prediction`; positive for
    /// `lambda < 1` breaks `trho(lambda X) <= lambda trho(X)`, hence both
    /// homogeneity and star-shapedness.
    pub homogeneity_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub mixture: MixtureCounterexample,
    pub scaling: ScalingCounterexample,
    /// True when both counterexamples exhibit strictly positive violations
    /// and the quasi-logconvex side holds.
    pub all_confirmed: bool,
}

/// Evaluates the two built-in counterexamples that separate the geometric
/// property zoo from the arithmetic one.
///
/// 1. On a uniform two-atom space, the geometric mean `exp(E[log X])` sends
///    `X = (1, e^3)`, `Y = (e^2, e^2)` to `e^1.5` and `e^2`, but their
///    arithmetic half-mixture to about `7.5909 > e^2`: quasi-convexity
///    fails while the geometric half-mixture stays below `e^2`.
/// 2. The geometric certainty equivalent with the kinked transform
///    (`x` below zero, `x^2 + x` above) sends the same `X` to `e^2`, yet
///    scaling by `lambda = 1/e` gives `exp((sqrt(11) - 1)/2) ~ 3.1847`,
///    strictly above `lambda * e^2 = e`: positive homogeneity and
///    star-shapedness both fail.
pub fn builtin_counterexamples() -> Result<CounterexampleReport> {
    let space = ProbSpace::uniform(2);
    let q = crate::prob::Scenario::reference(space.clone());
    let e = std::f64::consts::E;

    // Part 1: worst-case geometric mean over the singleton reference set.
    let x = PositivePosition::new(space.clone(), vec![1.0, e.powi(3)])?;
    let y = PositivePosition::constant(space.clone(), e.powi(2))?;
    let alpha = 0.5;
    let gm = |p: &PositivePosition| crate::measures::h0_premium(p, &q);
    let measure_x = gm(&x)?;
    let measure_y = gm(&y)?;
    let arith = PositivePosition::new(
        space.clone(),
        x.values().iter().zip(y.values()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect(),
    )?;
    let geo = PositivePosition::new(
        space.clone(),
        x.values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| a.powf(alpha) * b.powf(1.0 - alpha))
            .collect(),
    )?;
    let arithmetic_mixture_value = gm(&arith)?;
    let geometric_mixture_value = gm(&geo)?;
    let cap = measure_x.max(measure_y);
    let mixture = MixtureCounterexample {
        x: x.values().to_vec(),
        y: y.values().to_vec(),
        alpha,
        measure_x,
        measure_y,
        arithmetic_mixture_value,
        geometric_mixture_value,
        quasi_convexity_violation: arithmetic_mixture_value - cap,
        quasi_logconvexity_slack: cap - geometric_mixture_value,
    };

    // Part 2: geometric certainty equivalent with the kinked transform.
    let ell = crate::measures::LossTransform::PiecewiseQuadratic;
    let qs = crate::prob::ScenarioSet::reference(space.clone());
    let lambda = 1.0 / e;
    let ce = crate::measures::mean_value_ce(&x, &ell, &qs)?;
    let ce_scaled = crate::measures::mean_value_ce(&x.scale(lambda)?, &ell, &qs)?;
    let scaling = ScalingCounterexample {
        x: x.values().to_vec(),
        lambda,
        measure_x: ce,
        measure_scaled: ce_scaled,
        homogeneous_prediction: lambda * ce,
        homogeneity_violation: ce_scaled - lambda * ce,
    };

    let all_confirmed = mixture.quasi_convexity_violation > 0.0
        && mixture.quasi_logconvexity_slack >= 0.0
        && scaling.homogeneity_violation > 0.0;
    Ok(CounterexampleReport { mixture, scaling, all_confirmed })
}
