use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("degenerate gauge: {0}")]
    DegenerateGauge(String),

    #[error("empty intersection: {0}")]
    EmptyIntersection(String),

    #[error("point outside the cone: {0}")]
    DomainError(String),

    #[error("quadrature tolerance not met: estimated relative error {achieved:.3e} > target {target:.3e}")]
    ToleranceNotMet { achieved: f64, target: f64 },

    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    #[error("curvature undefined: {0}")]
    CurvatureUndefined(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("incompatible Neumann data: discrete defect {defect:.3e} after projection")]
    IncompatibleData { defect: f64 },

    #[error("singular density: {0}")]
    SingularDensity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
