use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(
        "regret decomposition violated at t={t}: pseudo-regret {pseudo} vs sum of gap*pulls {decomposed}"
    )]
    Decomposition {
        t: u64,
        pseudo: f64,
        decomposed: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
