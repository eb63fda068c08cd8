use thiserror::Error;

/// Errors raised by mesh construction, assembly, solvers and the optimization driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDivergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("newton iteration did not converge: residual history {history:?}")]
    NewtonDivergence { history: Vec<f64> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<S: Into<String>>(msg: S) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn contract<S: Into<String>>(msg: S) -> Error {
    Error::Contract(msg.into())
}
