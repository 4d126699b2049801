//! States, distributions, transition systems, variants and witnesses.

mod distribution;
mod real;
mod report;
mod state;
mod stepfn;
mod system;
mod window;
mod witness;

pub use distribution::{Distribution, Prob, DEFAULT_NORMALIZATION_TOLERANCE};
pub use real::{parse_decimal, ParseRealError, Real};
pub use report::{Bounds, CheckReport, ConditionResult, Counterexample, Verdict, WindowSummary, MAX_COUNTEREXAMPLES};
pub use state::StateId;
pub use stepfn::MonotoneStepFn;
pub(crate) use stepfn::dsl_number;
pub use system::{TransitionSystem, Variant};
pub use window::{enumerate_window, enumerate_window_below, Window};
pub use witness::{NablaWitness, PdWitness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("distribution has empty support")]
    EmptyDistribution,
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid probability {0}")]
    BadProbability(String),
    #[error("state {0} appears twice in a distribution's support")]
    DuplicateSupport(StateId),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("transitions queried on target state {0}")]
    TargetQueried(StateId),
    #[error("no transitions defined at non-target state {0}")]
    NoTransitions(StateId),
    #[error("variant is not finite at {0}")]
    NonFiniteVariant(StateId),
    #[error("state arity must be positive")]
    ZeroArity,
    #[error("system has no initial states")]
    NoInitialStates,
    #[error("invalid step function: {0}")]
    BadStepFn(String),
    #[error("step function is not non-increasing: {0}")]
    NotNonIncreasing(String),
    #[error("invalid witness: {0}")]
    BadWitness(String),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(String),
    #[error("node budget must be positive")]
    ZeroBudget,
    #[error("{0}")]
    Eval(String),
}

/// `Exp_δ V`. Exact whenever the weights and the variant values are.
pub fn expected_value(delta: &Distribution, v: &Variant) -> Result<Real, ModelError> {
    if delta.arity() != v.arity() {
        return Err(ModelError::ArityMismatch { expected: v.arity(), found: delta.arity() });
    }
    let mut acc = Real::zero();
    for (s, p) in delta.iter() {
        acc = acc + p * v.eval(s)?;
    }
    Ok(acc)
}
