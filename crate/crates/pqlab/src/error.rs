use thiserror::Error;

/// Errors surfaced by the solvers, the combination calculus, and the report
/// builders. Variants carry enough context to diagnose the failing input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid dilation factor t = {0}; need t > 0")]
    InvalidScale(f64),

    #[error("no zero crossing found up to x = {horizon} (found {found} of {wanted})")]
    NoZeroFound { horizon: f64, found: usize, wanted: usize },

    #[error("integrator step failure: {0}")]
    StepFailure(String),

    #[error("no sign change of u(r) over the mu sweep [{mu_lo}, {mu_hi}]")]
    BracketFailure { mu_lo: f64, mu_hi: f64 },

    #[error("minimization did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("empty selection: at least one component must be selected")]
    EmptySelection,

    #[error("{m} selected components would generate 2^{m} sign variants (cap is 20)")]
    TooManyVariants { m: usize },

    #[error("tail summand ratio {ratio} >= 1: compactness condition violated")]
    DivergentTail { ratio: f64 },

    #[error("selection budget exceeded: more than {cap} selections; reduce depth or cutoff")]
    BudgetExceeded { cap: u64 },

    #[error("only {found} distinct spectrum values in the certificate interval, need {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
