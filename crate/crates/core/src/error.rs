use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cannot build a state with zero qubits")]
    EmptySystem,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a {qubits}-qubit state (sites are 1-based)")]
    SiteOutOfRange { site: usize, qubits: usize },

    #[error("invalid bit value {0:?}; expected '0' or '1'")]
    InvalidBit(char),

    #[error("{qubits} qubits exceeds the dense cap of {cap}")]
    DenseCapExceeded { qubits: usize, cap: usize },

    #[error("two-qubit gate on sites {0} and {1} is not adjacent")]
    NotAdjacent(usize, usize),

    #[error("gate references site {0} more than once")]
    DuplicateSite(usize),

    #[error("control/target overlap at site {0}")]
    OverlappingControlTarget(usize),

    #[error("C^k-NOT requires at least one control")]
    NoControls,

    #[error("malformed gate: {0}")]
    MalformedGate(String),

    #[error("projection has zero weight ({weight:e})")]
    ZeroWeightProjection { weight: f64 },

    #[error("reduced density matrix at cut {cut} is not Hermitian (deviation {deviation:e})")]
    NonHermitianDensity { cut: usize, deviation: f64 },

    #[error("reduced density matrix at cut {cut} has eigenvalue {value:e} below the PSD tolerance")]
    NegativeEigenvalue { cut: usize, value: f64 },

    #[error("a sum of states needs at least one term")]
    EmptySum,

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid Grover parameters: {0}")]
    InvalidGroverSpec(String),
}

pub type SimResult<T> = Result<T, SimError>;
