use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("degenerate metric at grid point {point:?} (|det g| = {det:e})")]
    DegenerateMetric { point: Vec<usize>, det: f64 },

    #[error("metric at grid point {point:?} has det g = {det:e}, wrong sign for the {signature} signature")]
    SignatureViolation {
        point: Vec<usize>,
        det: f64,
        signature: &'static str,
    },

    #[error("superluminal velocity v = {speed:e} >= c = {c:e} at grid point {point:?}")]
    Superluminal { point: Vec<usize>, speed: f64, c: f64 },

    #[error("singular coordinate Jacobian at grid point {point:?}")]
    SingularJacobian { point: Vec<usize> },

    #[error("eigensolver did not converge: {converged} of {requested} pairs, worst residual {residual:e}")]
    Convergence {
        requested: usize,
        converged: usize,
        residual: f64,
    },

    #[error("malformed field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
