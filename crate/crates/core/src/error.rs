use alloc::string::String;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::state::MAX_QUBITS)]
    QubitCount(usize),
    #[error("malformed basis label {label:?} for {n_qubits} qubits")]
    MalformedBitstring { label: String, n_qubits: usize },
    #[error("qubit {qubit} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("duplicate target qubits")]
    DuplicateTargets,
    #[error("operator acts on {expected} qubit(s) but {got} target(s) given")]
    ArityMismatch { expected: usize, got: usize },
    #[error("kraus operators violate completeness by {deviation:e}")]
    IncompleteChannel { deviation: f64 },
    #[error("channel has no operators")]
    EmptyChannel,
    #[error("{name} = {value} is not a probability in [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} = {value} must be positive")]
    NonPositiveTime { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measurement of qubit {qubit} has no branch with positive probability")]
    DegenerateMeasurement { qubit: usize },
    #[error("noise model covers {got} qubits but register has {expected}")]
    NoiseModelSize { expected: usize, got: usize },
    #[error("cat-state verification failed after {retries} retries")]
    CatRetriesExhausted { retries: usize },
    #[error("malformed syndrome: expected {expected} bits, got {got}")]
    MalformedSyndrome { expected: usize, got: usize },
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
