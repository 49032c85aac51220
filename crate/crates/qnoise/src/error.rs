//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{name}` expects {expected} parameter(s), got {got}")]
    BadParameterCount {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("gate matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("target qubit {qubit} out of range for {n_qubits} qubit(s)")]
    TargetOutOfRange { qubit: usize, n_qubits: usize },
    #[error("duplicate target qubit {0} in one gate or layer")]
    DuplicateTarget(usize),
    #[error("gate `{name}` takes {arity} target(s), got {got}")]
    ArityMismatch {
        name: String,
        arity: usize,
        got: usize,
    },
    #[error("bit string `{0}` is not a valid `{{0,1}}`* string")]
    BadBitString(String),
    #[error("bit string length {got} does not match {expected} qubit(s)")]
    BitStringLength { got: usize, expected: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("fault location (qubit {qubit}, layer {layer}) invalid for circuit")]
    BadFaultLocation { qubit: usize, layer: usize },
    #[error("duplicate fault location (qubit {qubit}, layer {layer})")]
    DuplicateFaultLocation { qubit: usize, layer: usize },
    #[error("error rate {0} outside [{1}, {2}]")]
    RateOutOfRange(f64, f64, f64),
    #[error("Pauli weights must be non-negative and sum to 1 (got sum {0})")]
    BadPauliWeights(f64),
    #[error("operation limited to {limit} qubit(s), got {got}")]
    QubitLimit { limit: usize, got: usize },
    #[error("matrix is not a valid density matrix: {0}")]
    BadDensityMatrix(&'static str),
    #[error("Kraus operators do not satisfy the completeness sum (max deviation {0:.3e})")]
    BadKrausSum(f64),
    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("empty circuit has no error-rate bound")]
    EmptyCircuit,
    #[error("expected fault count L*p = {0:.3} exceeds 1; use the Monte Carlo estimator")]
    ExhaustiveDomain(f64),
    #[error("ideal score {score:.4} is below the threshold {threshold}; circuit fails without noise")]
    IdealBelowThreshold { score: f64, threshold: f64 },
    #[error("need at least {0} distinct sequence lengths to fit")]
    NotEnoughLengths(usize),
    #[error("fit did not converge: {0}")]
    FitFailed(String),
    #[error("group element not found after canonicalization")]
    ElementNotFound,
    #[error("Clifford group construction supports n <= 2, got {0}")]
    GroupTooLarge(usize),
    #[error("fiducial frame is not informationally complete (condition number {0:.3e})")]
    SingularGram(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("circuit file parse error: {0}")]
    Parse(String),
    #[error("circuit file validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
