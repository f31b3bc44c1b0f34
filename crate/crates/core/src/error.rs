use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range 1..={n}")]
    QubitIndex { index: usize, n: usize },
    #[error("qubit index {0} listed twice")]
    DuplicateQubit(usize),
    #[error("cannot trace out all {0} qubits")]
    AllQubitsLost(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm/trace = {0})")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("too many qubits: {0} (at most {max})", max = crate::qstate::MAX_QUBITS)]
    TooManyQubits(usize),
    #[error("observable Bloch vector is not a unit vector (norm {0})")]
    NotUnitVector(f64),
    #[error("settings are not an orthonormal triad")]
    NotOrthonormal,
    #[error("filter is not trace non-increasing (largest singular value {0})")]
    FilterTooLarge(f64),
    #[error("filter annihilates state")]
    FilterAnnihilates,
    #[error("invalid coordinates: {0}")]
    InvalidCoords(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("unknown state: {0}")]
    UnknownState(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("scenario too large for LP membership: {0}")]
    ScenarioTooLarge(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("no {kind} detector for {arity}-party reductions")]
    NoDetector { kind: String, arity: usize },
    #[error("reports refer to different states")]
    MixedStates,
    #[error("empty feasible region")]
    EmptyRegion,
    #[error("unknown criterion: {0}")]
    UnknownCriterion(String),
}

impl Error {
    /// True for failures caused by the state itself rather than by malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::FilterAnnihilates | Error::EmptyRegion)
    }
}
