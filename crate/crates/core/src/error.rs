use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A Cholesky pivot fell at or below the pivot tolerance.
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix has no eigenvalue above the rank tolerance")]
    NoNonzeroEigenvalue,

    #[error("no samples recorded")]
    NoData,

    #[error("context norm {norm} exceeds 1")]
    ContextNorm { norm: f64 },

    #[error("arm {arm} has no recorded samples")]
    UninitializedArm { arm: usize },

    #[error("exploration coin requested during warm-up (t = {t}, p = {p})")]
    WarmupCoin { t: u64, p: u64 },

    #[error("stale action: policy is at step {expected}, action is for step {found}")]
    StaleAction { expected: u64, found: u64 },

    #[error("out-of-order step: expected {expected}, found {found}")]
    OutOfOrder { expected: u64, found: u64 },

    #[error("degenerate instance: no suboptimal context/arm pair (delta_max = {delta_max})")]
    DegenerateInstance { delta_max: f64 },

    #[error("support of size {size} is too large to enumerate")]
    SupportTooLarge { size: u128 },

    #[error("context distribution is not enumerable")]
    NotEnumerable,

    #[error("too few samples: need {needed}, have {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("step {t}: {source}")]
    Step {
        t: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::Parse { .. })
    }
}
