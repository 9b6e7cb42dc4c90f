use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the capacity of {limit} (minimum 1)")]
    Capacity { requested: usize, limit: usize },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("gate target {0} also appears among its controls")]
    TargetIsControl(usize),

    #[error("basis index {index} out of range for {num_qubits} qubits")]
    BasisIndex { index: usize, num_qubits: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid label {label} at sample {index} (expected 0 or 1)")]
    InvalidLabel { index: usize, label: u8 },

    #[error("IDX format error at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
