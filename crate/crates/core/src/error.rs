use thiserror::Error;

/// Errors produced by the engine.
///
/// Constructors validate eagerly (probabilities sum to one, densities are
/// nonnegative and integrate to one, positions are finite), so downstream
/// numeric code can assume well-formed inputs. Messages carry enough context
/// (row/column indices, offending sums) to locate the bad input without a
/// debugger.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability space failed validation (empty, nonpositive weights,
    /// probabilities not summing to one, duplicate outcome labels).
    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    /// A scenario density failed validation against its reference space.
    #[error("invalid scenario density: {0}")]
    InvalidScenario(String),

    /// A position failed validation (length mismatch, non-finite entries,
    /// or a positivity floor violation for geometric-side positions).
    #[error("invalid position: {0}")]
    InvalidPosition(String),

    /// Two objects built over different probability spaces were combined.
    #[error("probability space mismatch: {0}")]
    SpaceMismatch(String),

    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A root-finding bracket failed to contain a sign change even after the
    /// documented single widening step.
    #[error("bracketing failed: {0}")]
    BracketingFailed(String),

    /// An operation requiring equiprobable atoms was invoked on a space with
    /// unequal probabilities.
    #[error("equiprobable atoms required: {0}")]
    NotEquiprobable(String),

    /// A combinatorial routine was asked for more atoms than its documented
    /// bound (permutation enumeration grows factorially).
    #[error("problem size exceeds enumeration bound: {0}")]
    EnumerationBound(String),

    /// A constrained optimization problem has an empty feasible set.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// A precondition on a functional was violated (wrong side of the
    /// correspondence, missing dual structure, non-monotone input).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed (e.g. a dual optimum did not
    /// re-verify). Indicates a bug or pathological floating-point input.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    /// Scenario file ingestion failed; message carries row/column context.
    #[error("scenario input error: {0}")]
    ScenarioInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
