use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("nonlinearity does not provide {0}")]
    Capability(&'static str),

    #[error("no amplitude root for omega = {omega}: Q(omega, s) > 0 on the scan range")]
    NoRoot { omega: f64 },

    #[error("degenerate root for omega = {omega}: |dQ/ds| = {slope:e} at s = {amplitude}")]
    Degenerate { omega: f64, amplitude: f64, slope: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("mass derivative mismatch: integral {integral}, finite difference {finite_difference}")]
    ConsistencyFailure { integral: f64, finite_difference: f64 },

    #[error("profile integration broke down at x = {x}: {reason}")]
    TailBlowup { x: f64, reason: &'static str },

    #[error("profile tail R(X) = {tail:e} exceeds tolerance {tolerance:e}; enlarge the half-width")]
    TruncatedTail { tail: f64, tolerance: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("energy could not be made negative (best energy {best_energy:e}); mass at or below the threshold")]
    NoDescent { best_energy: f64 },

    #[error("solution blew up at t = {time}: sup |u| = {sup_norm:e}")]
    BlowupDetected { time: f64, sup_norm: f64 },

    #[error("linearized operator is numerically singular: {0}")]
    SingularSolve(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
