use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("measurement branch {outcome} has zero probability")]
    ImpossibleBranch { outcome: String },
    #[error("post-processing returned an invalid block: {0}")]
    Postprocess(String),
    #[error("channel did not halt within {max_blocks} blocks")]
    NonTermination { max_blocks: usize },
    #[error("invalid POVM effect: {0}")]
    InvalidEffect(String),
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("basis vectors are not orthonormal over GF(2): {0}")]
    BasisNotOrthonormal(String),
    #[error("qubit budget exceeded: requested {requested} with {in_use} in use, limit {limit}")]
    BudgetExceeded {
        requested: usize,
        in_use: usize,
        limit: usize,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("protocol error at round {round}: {reason}")]
    Protocol { round: u32, reason: String },
    #[error("frame error: {0}")]
    Frame(String),
    #[error("session aborted: {0}")]
    SessionAborted(String),
    #[error("simulator exceeded its iteration budget of {max_iters}")]
    IterationBudgetExceeded { max_iters: u64 },
    #[error("exact mode unavailable: {0}")]
    Mode(String),
    #[error("statistics error: {0}")]
    Stat(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
