use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by graph construction, kernel assembly and the numeric
/// routines. Audit violations are errors on purpose: a violated bound means
/// the implementation is wrong, so callers must not be able to ignore it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vertex {0} unreachable in undirected view")]
    Unreachable(VertexIdRepr),

    #[error("chain construction: {0}")]
    ChainConstruction(String),

    #[error("random Eulerian generator: connectivity not achieved within {0} retries")]
    ConnectivityRetries(usize),

    #[error("power iteration did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),

    #[error("subset enumeration needs n <= {limit}, got n = {n}")]
    TooLargeForExact { n: usize, limit: usize },

    #[error("integral bound requires min diagonal entry delta > 0")]
    ZeroDiagonal,

    #[error("phase audit violation: {0}")]
    PhaseAudit(String),

    #[error("threshold not reached within cap of {cap} steps")]
    ThresholdNotReached { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type VertexIdRepr = usize;
