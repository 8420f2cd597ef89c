use thiserror::Error;

use crate::arps::DeclineKind;

/// Errors raised by the decline kernels, fitters and forecasts.
///
/// Numeric payloads are widened to `f64` so the error type does not depend on
/// the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcaError {
    #[error("elapsed time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("invalid {kind} parameters: {reason}")]
    InvalidParameters { kind: DeclineKind, reason: String },

    #[error("invalid rate interval: {0}")]
    InvalidInterval(String),

    #[error("no decline detected (slope {slope})")]
    NoDecline { slope: f64 },

    #[error("harmonic regression produced a non-positive intercept {intercept}")]
    NonPositiveIntercept { intercept: f64 },

    #[error("at least {required} records are required, got {got}")]
    InsufficientRecords { required: usize, got: usize },

    #[error("time values have zero variance")]
    DegenerateTime,

    #[error("rate must be positive and finite, got {rate} at t = {t}")]
    InvalidRate { t: f64, rate: f64 },

    #[error("time must be finite and non-negative, got {t} at record {index}")]
    InvalidTime { index: usize, t: f64 },

    #[error("timestamps must be strictly increasing (record {index}: {t} after {previous})")]
    NonMonotonicTime { index: usize, previous: f64, t: f64 },

    #[error("invalid smoothing window: {0}")]
    InvalidSmoothing(String),

    #[error("fit window [{t_min}, {t_max}] is invalid or selects no records")]
    InvalidWindow { t_min: f64, t_max: f64 },

    #[error(
        "hyperbolic fit did not converge after {iterations} iterations \
         (best qi = {qi}, di = {di}, b = {b}, sse = {sse})"
    )]
    NotConverged {
        iterations: usize,
        qi: f64,
        di: f64,
        b: f64,
        sse: f64,
    },

    #[error("volume must be non-negative, got {0}")]
    NegativeVolume(f64),

    #[error("invalid forecast specification: {0}")]
    InvalidForecast(String),

    #[error("no decline models were requested")]
    NoModels,

    #[error("every requested model failed to fit: {0}")]
    AllModelsFailed(String),
}

pub type Result<T, E = DcaError> = std::result::Result<T, E>;
