use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} = {value} is outside the allowed range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("{what} is not unitary (residual {residual:.3e})")]
    NotUnitary { what: String, residual: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NonUnitVector { norm: f64 },

    #[error("Kraus operators are not trace preserving (max deviation {deviation:.3e})")]
    NotCptp { deviation: f64 },

    #[error("chi matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("compilation strategy `{strategy}` does not apply: {reason}")]
    StrategyInapplicable {
        strategy: &'static str,
        reason: String,
    },

    #[error("coefficient column {index} is degenerate (norm {norm:.3e})")]
    DegenerateColumn { index: usize, norm: f64 },

    #[error("Kraus operator {index} has a vanishing coefficient row")]
    ZeroRow { index: usize },

    #[error("ancilla outcome {outcome} out of range for dimension {dim}")]
    OutcomeOutOfRange { outcome: usize, dim: usize },

    #[error("negative classical weight {0}")]
    NegativeWeight(f64),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("circuit needs {wires} wires, budget is {max}")]
    WireBudget { wires: usize, max: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
