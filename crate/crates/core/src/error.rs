use thiserror::Error;

/// Everything that can go wrong while building states, stepping walks or
/// compiling circuits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("position register of {0} qubits is outside 1..=16")]
    InvalidQubitCount(u32),

    #[error("amplitudes are not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("point source u0 = {u0} lies outside a lattice of {size} sites")]
    PositionOutOfRange { u0: usize, size: usize },

    #[error("expected {expected} amplitudes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("states live on different lattices ({left} vs {right} sites)")]
    LatticeMismatch { left: usize, right: usize },

    #[error("coin axis phi = {coin} does not match the state basis phi = {state}")]
    BasisMismatch { coin: f64, state: f64 },

    #[error("dense matrices are limited to 64 sites, lattice has {0}")]
    DenseTooLarge(usize),

    #[error("non-finite angle or parameter: {0}")]
    NonFinite(&'static str),

    #[error("lattice momentum {0} lies outside (-pi, pi]")]
    MomentumOutOfRange(f64),

    #[error("scaling fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("walk variant {0} is not supported here")]
    UnsupportedVariant(String),

    #[error("no positional signal to define a shift angle (|b| = {0:e})")]
    NoSignal(f64),

    #[error("{steps} steps wrap around a lattice of {size} sites; signed moments are undefined")]
    Wraparound { steps: usize, size: usize },

    #[error("qubit {qubit} is out of range for a {count}-qubit register")]
    QubitOutOfRange { qubit: usize, count: usize },

    #[error("gate touches qubit {0} more than once")]
    DuplicateQubit(usize),

    #[error("register of {0} qubits is too large to simulate (limit 20)")]
    RegisterTooLarge(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qasm line {line}: {message}")]
    QasmParse { line: usize, message: String },

    #[error("cross-check failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
