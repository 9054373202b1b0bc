use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("length mismatch in {op}: expected {expected}, got {actual}")]
    LengthMismatch {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("channel covariance is rank deficient (smallest eigenvalue {min_eigenvalue:.3e})")]
    RankDeficientCovariance { min_eigenvalue: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("index {index} out of range for {what} (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: i64,
        bound: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    #[error("{op} requires the Fresnel transform kind, got {kind}")]
    UnsupportedKind { op: &'static str, kind: String },

    #[error(
        "{what} needs {candidates} candidates which exceeds the budget of {budget}; \
         reduce the block size or switch to the MMSE detector"
    )]
    BudgetExceeded {
        what: &'static str,
        candidates: u128,
        budget: u64,
    },

    #[error("error vector is identically zero")]
    ZeroError,

    #[error("channel has {rho} coefficients but the block size is only {k}")]
    TooManyCoefficients { rho: usize, k: usize },

    #[error("scheme {scheme}: {source}")]
    InScheme {
        scheme: String,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
