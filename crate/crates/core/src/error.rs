use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ground state is not |00>: sqrt(detuning^2 + coupling^2) = {lhs} >= omega_s + omega_e = {rhs}")]
    GroundStateViolation { lhs: f64, rhs: f64 },

    #[error("dressed level n = {n} lies outside the truncation N = {cutoff}")]
    OutOfTruncation { n: usize, cutoff: usize },

    #[error("truncation leakage {leakage:e} exceeds strict tolerance {tolerance:e}")]
    TruncationLeakage { leakage: f64, tolerance: f64 },

    #[error("subsystem dimension {0} is not supported (qubit only)")]
    UnsupportedDimension(usize),

    #[error("Fock extraction requires resonance, detuning = {0}")]
    DetuningNotZero(f64),

    #[error("Hilbert space dimension {dim} exceeds the Lie-algebra guard {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("Lie closure did not reach a fixed point after {0} generations")]
    LieNoConvergence(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::LieNoConvergence(_) => 3,
            Error::Invariant(_) => 4,
            _ => 2,
        }
    }
}
