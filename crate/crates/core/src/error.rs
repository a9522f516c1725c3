use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame parameters: {0}")]
    InvalidFrame(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inconsistent record at entry {index}: lower {lower} > upper {upper}")]
    InconsistentRecord {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error(
        "step sizes violate the convergence bound: tau*sigma*||sum L*L|| = {product} > 1 \
         (tau={tau}, sigma={sigma}, norm={norm})"
    )]
    StepSize {
        tau: f64,
        sigma: f64,
        norm: f64,
        product: f64,
    },

    #[error("frame is not Parseval tight (relative deviation {deviation:e})")]
    NotTight { deviation: f64 },

    #[error("non-finite iterate at iteration {iteration} ({block})")]
    NonFinite {
        iteration: usize,
        block: &'static str,
    },

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("signal is not peak-normalized: max |y| = {peak}")]
    NotNormalized { peak: f64 },

    #[error("malformed payload: {0}")]
    Payload(String),
}
