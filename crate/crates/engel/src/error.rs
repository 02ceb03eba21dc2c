use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("covector is not in the required stratum: {0}")]
    Stratum(String),
    #[error("integration failed at t = {t}: step size {h:e} underflowed")]
    StepUnderflow { t: f64, h: f64 },
    #[error("integration failed at t = {t}: non-finite state")]
    NonFinite { t: f64 },
    #[error("root not found: {0}")]
    RootNotFound(String),
}

pub type Result<T> = std::result::Result<T, EngelError>;
