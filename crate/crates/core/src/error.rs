use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported derivative order {order} (allowed: {allowed})")]
    InvalidOrder { order: usize, allowed: &'static str },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel mass {mass} must lie strictly between 0 and c^2 = {c2}")]
    InadmissibleKernel { mass: f64, c2: f64 },

    #[error("kernel evaluated at negative history time s = {0}")]
    NegativeHistoryTime(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("closure memory requires an exponential kernel")]
    ClosureRequiresExponential,

    #[error("resolved history is not available for a closure-moment state")]
    HistoryUnavailable,

    #[error("time step {dt} is invalid: {reason}")]
    InvalidTimeStep { dt: f64, reason: String },

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
