//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid is too coarse to represent the requested trigonometric polynomial.
    #[error("aliasing: {nodes} nodes cannot resolve a degree-{degree} field (need at least {required})")]
    Aliasing {
        degree: usize,
        nodes: usize,
        required: usize,
    },

    /// Invalid parameters or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A Fourier multiplier or grid evaluation produced NaN or infinity.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The integrated state stopped being finite.
    #[error("divergence at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    /// The integrated state exceeded the configured norm bound.
    #[error("norm guard tripped at step {step}: |||state|||_1 = {norm:.6e} > {bound:.6e}")]
    Guard { step: usize, norm: f64, bound: f64 },

    /// Hypotheses of a diagnostic are not met by its inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A reference solution failed its self-consistency checks.
    #[error("reference failure: {0}")]
    Reference(String),

    /// Not enough data to fit a convergence order.
    #[error("order estimation: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
