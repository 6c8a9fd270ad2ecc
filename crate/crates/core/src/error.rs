//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("place is not monic or not supported: {0}")]
    BadPlace(String),

    #[error("could not certify irreducibility within budget: {0}")]
    Inconclusive(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}
