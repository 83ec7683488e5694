use thiserror::Error;

/// Errors for matrix construction, channel algebra and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry count {got} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, got: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {expected} vs {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not {1} * 2^k for any k")]
    BadBlockDimension(usize, usize),

    #[error("qubit count {0} outside supported range {1}..={2}")]
    QubitCount(usize, usize, usize),

    #[error("marked index {marked} outside search space of dimension {dim}")]
    MarkedIndex { marked: usize, dim: usize },

    #[error("search-space dimension {0} must be at least 2")]
    SearchDimension(usize),

    #[error("noise parameter t = {0} outside [0, 1]")]
    NoiseParameter(f64),

    #[error("control amplitude theta = {0} outside [0, 1]")]
    ControlTheta(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0:.15})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("Kraus completeness violated (defect {0:.3e})")]
    KrausCompleteness(f64),

    #[error("measurement branch probability {0:.3e} is degenerate")]
    DegenerateBranch(f64),

    #[error("switch register at {levels} levels exceeds capacity {max}")]
    SwitchCapacity { levels: usize, max: usize },

    #[error("measurement requires at least one control qubit")]
    NoControls,

    #[error("no closed form for k = {0}; use the simulation path")]
    UnsupportedClosedForm(usize),

    #[error("cross-check '{context}' disagrees by {deviation:.3e}")]
    CrossCheck { context: &'static str, deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
