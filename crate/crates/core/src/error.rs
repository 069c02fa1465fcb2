use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("intersection appears empty: projection residual stalled at {residual:.3e}")]
    EmptyIntersection { residual: f64 },

    #[error("Dykstra projection did not converge in {iterations} cycles (residual {residual:.3e})")]
    DykstraNotConverged { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("ill-conditioned resolvent system (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("step size {lambda} outside admissible interval (0, {upper})")]
    InadmissibleStep { lambda: f64, upper: f64 },

    #[error("unknown problem reference `{0}`")]
    UnknownProblem(String),

    #[error("problem construction failed: {0}")]
    Construction(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
