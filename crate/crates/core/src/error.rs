use alloc::string::String;

use crate::simcore::GateKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the simulator, templates, schedules and training code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside the supported range 1..=16")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("gate uses qubit {0} as both target and control")]
    OverlappingQubits(usize),
    #[error("{kind:?} takes {expected} parameter slot(s), got {got}")]
    SlotArity { kind: GateKind, expected: usize, got: usize },
    #[error("{0:?} requires a control qubit")]
    MissingControl(GateKind),
    #[error("{0:?} does not take a control qubit")]
    UnexpectedControl(GateKind),
    #[error("parameter slot {slot} missing from a vector of length {len}")]
    MissingParameter { slot: usize, len: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("parameter slot {0} is not used by any gate")]
    UnusedSlot(usize),
    #[error("parameter slot {0} is shared by several gates; no shift rule applies")]
    SharedSlot(usize),
    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("cannot amplitude-embed a zero-norm feature vector")]
    ZeroNorm,
    #[error("operator acts on {got} qubits but the state has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("observables are not qubit-wise commuting and cannot share one measurement")]
    NonCommuting,
    #[error("invalid Pauli letter {0:?}")]
    InvalidPauli(char),
    #[error("epoch index must be >= 1")]
    EpochIndex,
    #[error("invalid shot schedule: {0}")]
    Schedule(&'static str),
    #[error("IDX: {0}")]
    Idx(#[from] IdxError),
    #[error("class {class} has {available} items, {requested} requested")]
    InsufficientClass { class: u8, requested: usize, available: usize },
    #[error("label {0} outside 0..=9")]
    InvalidLabel(u8),
    #[error("non-finite coefficient for Pauli term {0}")]
    NonFiniteCoefficient(String),
    #[error("Hamiltonian is empty")]
    EmptyHamiltonian,
    #[error("{0} qubits exceeds the exact-diagonalization limit of 14; supply a reference energy")]
    TooLargeForExact(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

/// Malformed IDX containers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdxError {
    #[error("magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated file: need {expected} bytes, have {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image dimensions {rows}x{cols}, expected 28x28")]
    BadDimensions { rows: u32, cols: u32 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
}
