//! Finite probability spaces, positions, and scenario densities.
//!
//! Everything downstream is built on a finite space `{omega_1, ..., omega_n}`
//! with strictly positive reference probabilities. Positions are real-valued
//! vectors over the outcomes (monetary units, or log-returns); geometric-side
//! code works with [`PositivePosition`], a validated strictly positive
//! position. Alternative scenarios `Q` are carried as densities `dQ/dP`
//! against the reference measure.
//!
//! Two integral routines matter for the law-invariant machinery:
//!
//! * [`comonotone_integral`] evaluates `∫_0^1 q_X(beta) q_{dQ/dP}(beta) dbeta`
//!   exactly by walking the merged breakpoints of the two (piecewise
//!   constant) quantile functions — the Hardy–Littlewood upper bound for
//!   `E_Q[X]` over scenarios with the law of `Q`;
//! * [`law_equivalent_sup`] computes the same supremum by brute force, as a
//!   maximum of `E[d_pi * X]` over all permutations `pi` of the density on
//!   equiprobable atoms. It exists to cross-check the quantile route and is
//!   deliberately kept free of any shared code with it.

use std::sync::Arc;

use itertools::Itertools;

use crate::{Error, Result};

/// Probabilities must sum to one within this tolerance.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Default positivity floor for geometric-side positions.
pub const POS_FLOOR: f64 = 1e-12;

/// Tie tolerance when comparing a cumulative probability against a quantile
/// level: cumulative sums are computed by repeated addition and can sit one
/// ulp below an exactly representable level like `0.5`.
const QUANTILE_TIE_TOL: f64 = 1e-12;

/// A finite probability space: outcome labels plus strictly positive
/// reference probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSpace {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

impl ProbSpace {
    /// Builds a space after validating labels and probabilities.
    ///
    /// # Errors
    ///
    /// Rejects empty spaces, mismatched lengths, duplicate labels,
    /// nonpositive or non-finite probabilities, and probability vectors
    /// whose sum deviates from one by more than [`PROB_SUM_TOL`]. The sum is
    /// never silently renormalized.
    pub fn new(outcomes: Vec<String>, probs: Vec<f64>) -> Result<Arc<Self>> {
        if outcomes.is_empty() {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        if outcomes.len() != probs.len() {
            return Err(Error::InvalidSpace(format!(
                "{} outcome labels but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        for (i, p) in probs.iter().enumerate() {
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "probability {p} at outcome index {i} (label {:?}) is not strictly positive",
                    outcomes[i]
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidSpace(format!(
                "probabilities sum to {sum:.17e}, off by {:.3e} (tolerance {PROB_SUM_TOL:.0e}); \
                 refusing to renormalize",
                sum - 1.0
            )));
        }
        let mut sorted = outcomes.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace("duplicate outcome labels".into()));
        }
        Ok(Arc::new(ProbSpace { outcomes, probs }))
    }

    /// Equiprobable space with `n` atoms labelled `w1..wn`.
    pub fn uniform(n: usize) -> Arc<Self> {
        let outcomes = (1..=n).map(|i| format!("w{i}")).collect();
        let probs = vec![1.0 / n as f64; n];
        ProbSpace::new(outcomes, probs).expect("uniform space is always valid")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    /// True when all atoms carry the same probability (within
    /// [`PROB_SUM_TOL`]). Several law-invariance routines require this.
    pub fn is_equiprobable(&self) -> bool {
        let target = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - target).abs() <= PROB_SUM_TOL)
    }
}

/// True when two objects may be combined: same allocation or equal content.
pub(crate) fn same_space(a: &Arc<ProbSpace>, b: &Arc<ProbSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn require_same_space(a: &Arc<ProbSpace>, b: &Arc<ProbSpace>, what: &str) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "{what}: {} atoms vs {} atoms",
            a.len(),
            b.len()
        )))
    }
}

/// A real-valued random variable over a [`ProbSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    space: Arc<ProbSpace>,
    values: Vec<f64>,
}

impl Position {
    /// # Errors
    ///
    /// Rejects length mismatches and non-finite entries.
    pub fn new(space: Arc<ProbSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidPosition(format!(
                "{} values over a space with {} atoms",
                values.len(),
                space.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPosition(format!(
                "non-finite value {v} at outcome index {i}"
            )));
        }
        Ok(Position { space, values })
    }

    /// Constant position `c` on every atom.
    pub fn constant(space: Arc<ProbSpace>, c: f64) -> Result<Self> {
        Position::new(space.clone(), vec![c; space.len()])
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map; the result must still be finite everywhere.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Position> {
        Position::new(self.space.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise sum of two positions over the same space.
    pub fn add(&self, other: &Position) -> Result<Position> {
        require_same_space(&self.space, &other.space, "position sum")?;
        Position::new(
            self.space.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    /// Adds the scalar `h` on every atom (cash shift).
    pub fn shift(&self, h: f64) -> Result<Position> {
        self.map(|v| v + h)
    }

    pub fn scale(&self, lambda: f64) -> Result<Position> {
        self.map(|v| lambda * v)
    }

    /// Pointwise exponential, producing a geometric-side position.
    pub fn exp(&self) -> Result<PositivePosition> {
        let exp = self.map(f64::exp)?;
        PositivePosition::new(exp.space.clone(), exp.values)
    }
}

/// A strictly positive position (gross returns, wealth relatives).
///
/// Entries are validated against a positivity floor so that logarithms and
/// ratios stay well-behaved. Dereferences to [`Position`] for everything
/// that does not need positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivePosition(Position);

impl PositivePosition {
    /// Validates with the default floor [`POS_FLOOR`].
    pub fn new(space: Arc<ProbSpace>, values: Vec<f64>) -> Result<Self> {
        PositivePosition::with_floor(space, values, POS_FLOOR)
    }

    /// Validates with a caller-chosen positivity floor.
    pub fn with_floor(space: Arc<ProbSpace>, values: Vec<f64>, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "positivity floor must be > 0, got {floor}"
            )));
        }
        let pos = Position::new(space, values)?;
        if let Some((i, v)) = pos.values.iter().enumerate().find(|(_, v)| **v < floor) {
            return Err(Error::InvalidPosition(format!(
                "value {v:.6e} at outcome index {i} is below the positivity floor {floor:.0e}"
            )));
        }
        Ok(PositivePosition(pos))
    }

    pub fn constant(space: Arc<ProbSpace>, c: f64) -> Result<Self> {
        PositivePosition::new(space.clone(), vec![c; space.len()])
    }

    pub fn as_position(&self) -> &Position {
        &self.0
    }

    /// Pointwise natural log, landing back on the monetary side.
    pub fn ln(&self) -> Position {
        // Positivity was validated, so the log is finite.
        Position::new(self.0.space.clone(), self.0.values.iter().map(|v| v.ln()).collect())
            .expect("log of validated positive values is finite")
    }

    /// Pointwise power `X^alpha`.
    pub fn pow(&self, alpha: f64) -> Result<PositivePosition> {
        PositivePosition::new(
            self.0.space.clone(),
            self.0.values.iter().map(|v| v.powf(alpha)).collect(),
        )
    }

    /// Pointwise product (multiplicative aggregation).
    pub fn mul(&self, other: &PositivePosition) -> Result<PositivePosition> {
        require_same_space(&self.0.space, &other.0.space, "position product")?;
        PositivePosition::new(
            self.0.space.clone(),
            self.0.values.iter().zip(&other.0.values).map(|(a, b)| a * b).collect(),
        )
    }

    /// Scalar multiple `lambda * X`, `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Result<PositivePosition> {
        PositivePosition::new(self.0.space.clone(), self.0.values.iter().map(|v| lambda * v).collect())
    }

    /// Pointwise reciprocal `1 / X`.
    pub fn recip(&self) -> Result<PositivePosition> {
        PositivePosition::new(self.0.space.clone(), self.0.values.iter().map(|v| 1.0 / v).collect())
    }

    /// Pointwise ratio `X / Y`.
    pub fn div(&self, other: &PositivePosition) -> Result<PositivePosition> {
        require_same_space(&self.0.space, &other.0.space, "position ratio")?;
        PositivePosition::new(
            self.0.space.clone(),
            self.0.values.iter().zip(&other.0.values).map(|(a, b)| a / b).collect(),
        )
    }
}

impl std::ops::Deref for PositivePosition {
    type Target = Position;

    fn deref(&self) -> &Position {
        &self.0
    }
}

/// An alternative scenario `Q`, stored as the density `dQ/dP` against the
/// reference probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    space: Arc<ProbSpace>,
    density: Vec<f64>,
}

impl Scenario {
    /// # Errors
    ///
    /// Rejects negative or non-finite density values and densities that do
    /// not integrate to one against the reference probabilities (within
    /// [`PROB_SUM_TOL`]); no silent renormalization.
    pub fn new(space: Arc<ProbSpace>, density: Vec<f64>) -> Result<Self> {
        if density.len() != space.len() {
            return Err(Error::InvalidScenario(format!(
                "{} density values over a space with {} atoms",
                density.len(),
                space.len()
            )));
        }
        for (i, d) in density.iter().enumerate() {
            if !d.is_finite() || *d < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "density value {d} at outcome index {i} is not finite and nonnegative"
                )));
            }
        }
        let mass: f64 = density.iter().zip(space.probs()).map(|(d, p)| d * p).sum();
        if (mass - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidScenario(format!(
                "density integrates to {mass:.17e} against the reference measure, off by {:.3e} \
                 (tolerance {PROB_SUM_TOL:.0e}); refusing to renormalize",
                mass - 1.0
            )));
        }
        Ok(Scenario { space, density })
    }

    /// The reference measure itself (`dQ/dP = 1`).
    pub fn reference(space: Arc<ProbSpace>) -> Self {
        let n = space.len();
        Scenario { space, density: vec![1.0; n] }
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Probability weight `p_i * d_i` of atom `i` under `Q`.
    pub fn weight(&self, i: usize) -> f64 {
        self.space.probs()[i] * self.density[i]
    }
}

/// A nonempty collection of scenarios over one space, indexed by position.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    space: Arc<ProbSpace>,
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        let first = scenarios
            .first()
            .ok_or_else(|| Error::InvalidScenario("scenario set is empty".into()))?;
        let space = first.space.clone();
        for (i, s) in scenarios.iter().enumerate() {
            require_same_space(&space, &s.space, &format!("scenario {i}"))?;
        }
        Ok(ScenarioSet { space, scenarios })
    }

    /// The singleton set containing only the reference measure.
    pub fn reference(space: Arc<ProbSpace>) -> Self {
        ScenarioSet { space: space.clone(), scenarios: vec![Scenario::reference(space)] }
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn get(&self, i: usize) -> &Scenario {
        &self.scenarios[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter()
    }
}

/// Expectation `E_Q[X] = sum_i p_i d_i x_i`.
pub fn expect(x: &Position, q: &Scenario) -> Result<f64> {
    require_same_space(x.space(), q.space(), "expectation")?;
    Ok(x.values()
        .iter()
        .zip(q.density())
        .zip(x.space().probs())
        .map(|((x, d), p)| p * d * x)
        .sum())
}

/// Expectation under the reference measure.
pub fn expect_p(x: &Position) -> f64 {
    x.values().iter().zip(x.space().probs()).map(|(x, p)| p * x).sum()
}

/// Values of `x` sorted ascending, with cumulative reference probabilities.
///
/// The last cumulative entry is forced to exactly `1.0` to absorb summation
/// rounding; intermediate entries keep their raw partial sums.
pub(crate) fn sorted_with_cum(values: &[f64], probs: &[f64]) -> Vec<(f64, f64)> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut out = Vec::with_capacity(idx.len());
    let mut cum = 0.0;
    for &i in &idx {
        cum += probs[i];
        out.push((values[i], cum));
    }
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    out
}

/// Smallest `alpha`-quantile `inf { v : P[X <= v] >= alpha }` for
/// `alpha` in `(0, 1)`.
///
/// Cumulative probabilities are compared against `alpha` with a tie
/// tolerance of `1e-12`, so levels that land exactly on an atom boundary
/// (like `alpha = 0.5` on a two-point space) select the attained lower
/// value even when the partial sums carry rounding noise.
pub fn quantile(x: &Position, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in (0, 1), got {alpha}"
        )));
    }
    let sorted = sorted_with_cum(x.values(), x.space().probs());
    for (v, cum) in &sorted {
        if *cum >= alpha - QUANTILE_TIE_TOL {
            return Ok(*v);
        }
    }
    // Unreachable: the last cumulative entry is exactly 1.0 > alpha.
    Ok(sorted.last().expect("nonempty space").0)
}

/// Exact comonotone integral `∫_0^1 q_X(beta) q_{dQ/dP}(beta) dbeta`.
///
/// Both quantile functions are piecewise constant, so the integral is a
/// finite sum over the merged breakpoints of the two sorted distributions.
/// On equiprobable atoms this equals the Hardy–Littlewood supremum
/// `max_pi E[d_pi X]` over permutations `pi` of the density (see
/// [`law_equivalent_sup`] for the brute-force twin).
pub fn comonotone_integral(x: &Position, q: &Scenario) -> Result<f64> {
    require_same_space(x.space(), q.space(), "comonotone integral")?;
    let probs = x.space().probs();
    let xs = sorted_with_cum(x.values(), probs);
    let ds = sorted_with_cum(q.density(), probs);
    let mut total = 0.0;
    let mut t = 0.0; // left edge of the current merged segment
    let (mut jx, mut jd) = (0usize, 0usize);
    while jx < xs.len() && jd < ds.len() {
        let next = xs[jx].1.min(ds[jd].1);
        total += (next - t) * xs[jx].0 * ds[jd].0;
        t = next;
        if xs[jx].1 <= next {
            jx += 1;
        }
        if ds[jd].1 <= next {
            jd += 1;
        }
    }
    Ok(total)
}

/// Permutation enumeration is capped here; beyond this the factorial blows up.
pub const PERMUTATION_ATOM_BOUND: usize = 9;

/// Supremum of `E[d_pi X]` over all permutations `pi` of the density of `q`,
/// by explicit enumeration. Equiprobable atoms only — on unequal atoms a
/// permuted density is generally not a density.
///
/// This is the brute-force route for the rearrangement supremum; it must
/// agree with [`comonotone_integral`] within `1e-10` and is used to validate
/// that faster route in tests.
///
/// # Errors
///
/// Rejects non-equiprobable spaces and spaces with more than
/// [`PERMUTATION_ATOM_BOUND`] atoms.
pub fn law_equivalent_sup(x: &Position, q: &Scenario) -> Result<f64> {
    require_same_space(x.space(), q.space(), "law-equivalent supremum")?;
    if !x.space().is_equiprobable() {
        return Err(Error::NotEquiprobable(format!(
            "law_equivalent_sup permutes the density across atoms; probabilities {:?} are unequal",
            x.space().probs()
        )));
    }
    let n = x.len();
    if n > PERMUTATION_ATOM_BOUND {
        return Err(Error::EnumerationBound(format!(
            "{n} atoms would require {n}! permutations (bound: {PERMUTATION_ATOM_BOUND})"
        )));
    }
    let probs = x.space().probs();
    let density = q.density();
    let mut best = f64::NEG_INFINITY;
    for perm in (0..n).permutations(n) {
        let val: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &pi)| probs[i] * density[pi] * x.values()[i])
            .sum();
        if val > best {
            best = val;
        }
    }
    Ok(best)
}
