use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mesh too coarse: {nodes_per_decade:.2} nodes per decade, need at least {required}")]
    MeshTooCoarse {
        nodes_per_decade: f64,
        required: f64,
    },

    #[error("point ({x}, {y}) is outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("point is the pole of the Green's function")]
    AtPole,

    #[error("operation not supported on this domain: {0}")]
    UnsupportedDomain(String),

    #[error("linear solve failed: {reason} (pivot estimate {pivot:.3e})")]
    Singular { reason: String, pivot: f64 },

    #[error("fixed-point iteration diverged after {iterations} steps (last ratio {ratio:.3}); try a smaller lambda or the Newton solver")]
    Diverged { iterations: usize, ratio: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("line search failed at iteration {iteration} (residual {residual:.3e})")]
    LineSearch { iteration: usize, residual: f64 },

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),

    #[error("config error: {0}")]
    Config(#[from] crate::harness::ConfigError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {v}"
        )))
    }
}
