use thiserror::Error;

/// Errors raised by models, classifiers, estimators and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameters imply an infinite mean: {0}")]
    InfiniteMean(String),

    #[error("model mean {mean} is not negative; use an unchecked model for positive-drift scenarios")]
    NonNegativeMean { mean: f64 },

    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),

    #[error("x must be positive, got {0}")]
    NonpositiveX(f64),

    #[error("grid needs at least {need} points, got {got}")]
    GridTooSmall { got: usize, need: usize },

    #[error("statistic ValueAtSigma requires a stopping rule independent of the walk, got {0}")]
    RuleNotIndependent(String),

    #[error("stopping rule not supported here: {0}")]
    UnsupportedRule(String),

    #[error("estimated p = {0} is degenerate (must lie strictly between 0 and 1)")]
    DegeneratePHat(f64),

    #[error("P(sigma > h(x)) / tail(x) = {ratio} at x = {x} exceeds {limit}")]
    PcondViolated { x: f64, ratio: f64, limit: f64 },

    #[error("lattice state space too large: x = {x} exceeds {max}")]
    StateSpaceTooLarge { x: u64, max: u64 },

    #[error("invalid configuration: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
