use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by geometry, scheduling, solving, and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("numerical overflow in exponentiated-gradient step")]
    NumericalOverflow,

    #[error("zero subgradient at k = {k}; the current point is optimal")]
    ZeroGradient { k: usize },

    #[error("non-monotonic step-size call: expected k = {expected}, got {got}")]
    NonMonotonicCall { expected: usize, got: usize },

    #[error("running statistic is unset: no step has been taken")]
    Unset,

    #[error("invalid averaging exponent m = {0}: {1}")]
    InvalidM(f64, &'static str),

    #[error("average requested before any update")]
    EmptyAverage,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("problem has no registered optimum")]
    MissingOptimum,

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("no closed-form R bound for this geometry; supply R explicitly")]
    NeedsExplicitR,

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("unknown problem name: {0:?}")]
    UnknownProblem(String),
}
