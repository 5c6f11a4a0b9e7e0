//! Error types shared across the crate.
//!
//! Every failure is typed; no routine returns NaN or a silent default. Domain
//! and exponent validation happens at construction, mesh generation fails on
//! non-positive Jacobians, and diagnostics refuse unconverged inputs unless
//! explicitly forced.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),

    #[error("exponent p = {p} invalid for dimension {dim}: {reason}")]
    Exponent { p: f64, dim: usize, reason: &'static str },

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("linear solve failed: {0}")]
    Linear(String),

    #[error("outer iteration did not converge: {0}")]
    Unconverged(String),

    #[error("diagnostics refused: solve did not converge (pass force=true to override)")]
    UnconvergedInput,
}
