use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("negative characteristic time s = {0}")]
    NegativeTime(f64),

    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("boundary value missing at t = {t}")]
    MissingBoundary { t: f64 },

    #[error("input window incomplete, missing times: {times:?}")]
    MissingInputs { times: Vec<f64> },

    #[error("output undefined before the delay: t = {t} < tau = {tau}")]
    OutputUndefined { t: f64, tau: f64 },

    #[error("cfl = {0} outside (0, 1]")]
    InvalidCfl(f64),

    #[error("insufficient samples for decay fit: {found} above floor, {required} required")]
    InsufficientSamples { found: usize, required: usize },

    #[error("configuration error: {0}")]
    Configuration(String),
}
