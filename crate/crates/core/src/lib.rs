//! Scenario-based engine for geometric (return-based) risk measurement on
//! finite probability spaces.
//!
//! Classical risk measures act on monetary positions and price risk in cash
//! units: `rho(Z + h) = rho(Z) + h`. This crate works with their geometric
//! counterparts, which act on strictly positive positions (gross returns,
//! wealth relatives) and price risk multiplicatively. The two worlds are
//! linked by a bijection
//!
//! ```text
//!     trho(X) = exp(rho(log X)),        rho(Z) = log(trho(exp Z)),
//! ```
//!
//! under which cash additivity becomes positive homogeneity, subadditivity
//! becomes submultiplicativity, convexity becomes logconvexity, and
//! quasi-convexity becomes quasi-logconvexity. The crate provides:
//!
//! * [`prob`] — finite probability spaces, positions, scenario densities,
//!   quantiles and comonotone (rearrangement) integrals;
//! * [`measures`] — a zoo of concrete measures on both sides of the
//!   bijection (value-at-risk, average value-at-risk and its geometric
//!   sibling, Orlicz premia, p-norms, robust and penalized variants,
//!   certainty equivalents);
//! * [`correspondence`] — the bijection itself plus sampled property
//!   checkers and a taxonomy classifier;
//! * [`duality`] — scenario-based dual representations driven by a monotone
//!   kernel `R(t; Q)`, kernel recovery from a black-box measure, and
//!   law-invariant evaluation routes;
//! * [`acceptance`] — families of acceptance sets at every risk level and
//!   the measures they induce;
//! * [`portfolio`] — wealth dynamics under buy-and-hold and rebalancing,
//!   diversification checks, and risk-minimizing portfolio selection;
//! * [`allocation`] — capital allocation rules derived from the dual
//!   representation.
//!
//! Everything is deterministic: all sampling is seeded explicitly and all
//! solvers are derivative-free with fixed iteration schedules, so identical
//! inputs produce identical outputs.

pub mod acceptance;
pub mod allocation;
pub mod correspondence;
pub mod duality;
pub mod error;
pub mod measures;
pub mod portfolio;
pub mod prob;

pub use error::{Error, Result};

/// Relative closeness predicate used throughout the crate.
///
/// Quantities on the geometric side live on a multiplicative scale (a value
/// of `exp(12)` has an ulp near `3e-11`), so comparisons against a fixed
/// absolute tolerance are meaningless for large values. This helper scales
/// the tolerance by `max(1, |a|, |b|)`, which degrades gracefully to an
/// absolute comparison for quantities of order one.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true; // covers equal infinities
    }
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}

/// Signed relative gap `(lhs - rhs) / max(1, |lhs|, |rhs|)`.
///
/// Positive values mean `lhs` exceeds `rhs`; property checkers treat a gap
/// above their tolerance as a violation of `lhs <= rhs`.
pub fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    if lhs.is_infinite() || rhs.is_infinite() {
        // Distinct infinities (or one finite side): the sign alone decides.
        return if lhs > rhs { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    (lhs - rhs) / 1.0_f64.max(lhs.abs()).max(rhs.abs())
}
