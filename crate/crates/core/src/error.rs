use thiserror::Error;

/// Errors raised by curve evaluation, reconstruction and quoting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PammError {
    /// `x + y = 0`: there is no anchor supply to normalize by.
    #[error("empty system: anchor supply x + y is zero")]
    EmptySystem,

    #[error("invalid static parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The anchor does not lie strictly inside `(theta_bar, 1)`.
    #[error("trivial curve: anchor ratio {ratio} is outside ({floor}, 1)")]
    TrivialCurve { ratio: f64, floor: f64 },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// The linear segment never meets the reserve ratio: the reserve would
    /// be exhausted before the supply.
    #[error("reserve exhaustion: slope {alpha} below {required} required for x_L to exist")]
    ReserveExhaustion { alpha: f64, required: f64 },

    #[error("slope {alpha} below minimal admissible slope {alpha_hat}")]
    SlopeTooSmall { alpha: f64, alpha_hat: f64 },

    #[error("insufficient supply: redeeming {amount} of {supply}")]
    InsufficientSupply { amount: f64, supply: f64 },

    #[error("negative amount {0}")]
    NegativeAmount(f64),

    #[error("negative radicand {value} in {context}")]
    NegativeRadicand { context: &'static str, value: f64 },

    #[error("region {region} is inconsistent with state: {detail}")]
    InconsistentRegion { region: String, detail: String },

    #[error("integration stalled at x = {x} with step {step}")]
    IntegrationFailure { x: f64, step: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("threshold verification failed: {0}")]
    ThresholdMismatch(String),
}

pub type Result<T> = std::result::Result<T, PammError>;
