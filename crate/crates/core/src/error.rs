use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) outside {rows}x{cols}")]
    EntryOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate matrix entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent linear system")]
    InconsistentSystem,

    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("check matrices do not commute (H_X * H_Z^T != 0)")]
    NonCommutingChecks,
    #[error("invalid monomial `{0}`")]
    InvalidMonomial(String),
    #[error("unknown code preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("infeasible balance tolerance {tol} for {n} data vertices")]
    InfeasibleBalance { tol: usize, n: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("circuit text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("fidelity {0} maps to a Bell error rate outside [0, 1]")]
    FidelityOutOfRange(f64),
    #[error("detector {0} is not deterministic under noiseless execution")]
    NonDeterministicDetector(usize),
    #[error("observable {0} is not deterministic under noiseless execution")]
    NonDeterministicObservable(usize),

    #[error("non-matchable detector error model: fault {fault} touches {detectors} detectors")]
    NonMatchable { fault: usize, detectors: usize },
    #[error("syndrome is outside the column space of the check matrix")]
    SyndromeNotInColumnSpace,

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("fit rejected point {index}: {message}")]
    Fit { index: usize, message: String },
    #[error("sample file: {0}")]
    SampleFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
