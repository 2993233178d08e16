use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("non-finite {what} at {location}")]
    NonFinite { what: &'static str, location: String },

    #[error("multiplier symbol is not finite at momentum {momentum:?}")]
    NonFiniteSymbol { momentum: Vec<f64> },

    #[error("momentum {momentum:?} is not on the lattice (aliasing would corrupt the field)")]
    OffLattice { momentum: Vec<f64> },

    #[error("memory budget exceeded: {required} entries required, {available} available")]
    Budget { required: u128, available: u128 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("kernel order {got} is too low, at least {need} is required")]
    OrderTooLow { got: usize, need: usize },

    #[error("level {0} is not available")]
    LevelUnavailable(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step collapse at t = {time}: dt = {dt:e} fell below dt_min = {dt_min:e} before the halt norm was reached")]
    StepCollapse { time: f64, dt: f64, dt_min: f64 },

    #[error("state became non-finite, first seen at t = {time}")]
    NanState { time: f64 },

    #[error("norm sequence diverges: {0}")]
    Divergent(String),

    #[error("symmetry defect {defect:e} exceeds {tolerance:e} at t = {time}")]
    SymmetryDefect { defect: f64, tolerance: f64, time: f64 },

    #[error("kernel is not hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
