use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("negative weight: {0}")]
    NegativeWeight(String),
    #[error("self-loop weight on vertex '{0}'")]
    SelfLoop(String),
    #[error("asymmetric beta between '{0}' and '{1}'")]
    Asymmetric(String, String),
    #[error("graph is disconnected: '{0}' is not reachable from '{1}'")]
    Disconnected(String, String),
    #[error("unknown vertex '{0}'")]
    UnknownVertex(String),
    #[error("no absorption: every killing rate is zero")]
    NoAbsorption,
    #[error("vertices must be distinct")]
    NotDistinct,
    #[error("killing rate at '{0}' must be positive")]
    ZeroKilling(String),
    #[error("graph too large for {method}: {vertices} vertices (limit {limit})")]
    TooLarge {
        method: &'static str,
        vertices: usize,
        limit: usize,
    },
    #[error("grassmann element is not even with zero constant term")]
    NotEvenNilpotent,
    #[error("action constructions disagree: {0}")]
    ConstructionMismatch(String),
    #[error("heap is not in H_gamma: {0}")]
    HeapNotCompatible(String),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("singular matrix")]
    Singular,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
