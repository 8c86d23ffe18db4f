use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index out of range: {0}")]
    Range(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A diagonal block of an LQ factor lost rank.
    #[error("rank-deficient input: block {block} of the row partition is singular")]
    SingularInput { block: usize },

    /// The future-input cross product `U_f U_fᵀ` could not be inverted.
    #[error(
        "input is not persistently exciting of order {order}; \
         use a richer excitation (PRBS or white noise) or a longer bootstrap segment"
    )]
    Excitation { order: usize },

    #[error("numerical breakdown: {0}; re-bootstrap the estimator")]
    Breakdown(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unstable model: {0}")]
    Unstable(String),

    #[error("tap set {taps:?} does not produce a maximal-length sequence for a {len}-bit register")]
    NonMaximalTaps { len: u32, taps: Vec<u32> },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
