use alloc::string::String;

pub type Result<T, E = SesaError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SesaError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid range: lo {lo} must be below hi {hi}")]
    Range { lo: f64, hi: f64 },
    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no skill reaches the minimum count of {min_count}")]
    EmptyVocabulary { min_count: usize },
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("non-finite value: {0}")]
    Numeric(String),
    #[error("forward cache does not match: {0}")]
    Consistency(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
}
