use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel {kernel} cannot be used here: {reason}")]
    UnsupportedKernel { kernel: String, reason: String },

    #[error("empty sample")]
    EmptySample,

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("index {index} out of range for sample of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no index j with |j - {index}| > {window} in a sample of length {len}")]
    EmptyExclusion { index: usize, window: usize, len: usize },

    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),

    #[error("quadrature did not converge on [{lo}, {hi}] (estimate {estimate}, error {error})")]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("threshold scan exceeded {limit} without both conditions holding")]
    ScanLimit { limit: u64 },

    #[error("score curve is NaN at every bandwidth")]
    AllNan,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateOrbit(_)
                | Error::QuadratureNonConvergence { .. }
                | Error::DegenerateRegression(_)
                | Error::ScanLimit { .. }
                | Error::AllNan
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
