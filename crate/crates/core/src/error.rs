use thiserror::Error;

/// Errors raised across the library. Each variant maps onto one CLI exit
/// code class (see `cli::exit_code`).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole of the gamma function at x = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("step size underflow after {iteration} iterations (h = {step_size:e})")]
    Stall { iteration: usize, step_size: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
