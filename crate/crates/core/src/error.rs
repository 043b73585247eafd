use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("lattice has {pairs} comparable pairs; at most {max} are supported")]
    LatticeTooLarge { pairs: usize, max: usize },
    #[error("{0} is not a subgroup of this lattice")]
    NotInLattice(String),
    #[error("{source_name} -> {target_name} is not a strict inclusion of subgroups")]
    NotAnArrow {
        source_name: String,
        target_name: String,
    },
    #[error("invalid interval: {bottom} is not contained in {top}")]
    InvalidInterval { bottom: String, top: String },
    #[error("{0} is only defined for squarefree groups")]
    NotSquarefree(&'static str),
    #[error("transfer systems live on different lattices")]
    LatticeMismatch,
    #[error(
        "brute-force search over {pairs} pairs exceeds the ceiling of {ceiling}; use the dfs engine"
    )]
    CeilingExceeded { pairs: usize, ceiling: usize },
    #[error("bit pattern has bits outside the {pairs} pairs of the lattice")]
    BitsOutOfRange { pairs: usize },
    #[error("not a transfer system: {0}")]
    NotTransferSystem(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("catalogue pair-order fingerprint {found} does not match lattice fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
