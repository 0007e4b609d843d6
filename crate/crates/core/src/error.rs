use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("{what} supports at most {cap} qubits, got {n}")]
    QubitCap { what: &'static str, n: usize, cap: usize },

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("Hamiltonian is not normalized (||H||_Fbar = {0})")]
    HamiltonianNotNormalized(f64),

    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("segment {0} has a zero Hamiltonian")]
    ZeroHamiltonian(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed: {0}")]
    NonFinite(String),

    #[error("budget infeasible: {0}")]
    Infeasible(String),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
