use crate::codes::CodeError;
use crate::graphlift::GraphLiftError;
use crate::pauli::PauliError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    GraphLift(#[from] GraphLiftError),
    #[error("{strategy} does not apply to this code: {reason}")]
    Inapplicable { strategy: String, reason: String },
    #[error("invalid test: {0}")]
    InvalidTest(String),
    #[error("invalid strategy: {0}")]
    StrategyInvalid(String),
    #[error("unsupported by the syndrome engine: {0}")]
    Unsupported(String),
    #[error("dense computation needs {n} qubits, above the cap of {cap}")]
    DenseCap { n: usize, cap: usize },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a configured size cap rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            Error::DenseCap { .. } | Error::Pauli(PauliError::EnumerationCap { .. }) => true,
            Error::Code(e) => e.is_resource_limit(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
