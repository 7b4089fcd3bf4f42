use thiserror::Error;

/// Errors raised by the library. Expert and round indices are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LbError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("lower bound exceeds loss at expert {expert}, round {round}")]
    LowerBoundAboveLoss { expert: usize, round: usize },

    #[error("upper bound below loss at expert {expert}, round {round}")]
    UpperBoundBelowLoss { expert: usize, round: usize },

    #[error("upper slack exceeds slack cap at expert {expert}, round {round}")]
    SlackCapExceeded { expert: usize, round: usize },

    #[error("negative slack {slack} at expert {expert}, round {round}")]
    NegativeSlack {
        expert: usize,
        round: usize,
        slack: f64,
    },

    #[error("observed reference value {reference} exceeds chosen loss {loss}")]
    ReferenceAboveLoss { reference: f64, loss: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("correction factor needs beta*slack <= 1, got {0}")]
    CorrectionDomain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{algorithm} cannot consume {feedback} feedback")]
    IncompatibleFeedback {
        algorithm: &'static str,
        feedback: &'static str,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LbError>;
