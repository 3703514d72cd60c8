use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient `{coefficient}` has nonzero fiber mean {mean:e} at q = {point:?}")]
    NonzeroMean {
        coefficient: String,
        point: Vec<f64>,
        mean: f64,
    },

    #[error("newton iteration did not converge at step {step} (residual {residual:e})")]
    NewtonDiverged { step: usize, residual: f64 },

    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid Lie algebra: {0}")]
    Algebra(String),

    #[error("initial conditions differ by {gap:e}")]
    InitialMismatch { gap: f64 },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
