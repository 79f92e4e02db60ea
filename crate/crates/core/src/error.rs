use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no edges")]
    EmptyGraph,

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("statistic is undefined: {0}")]
    UndefinedStatistic(String),

    #[error("graph is disconnected ({components} components); extract the largest connected component first")]
    Disconnected { components: usize },

    #[error("graph has {nodes} nodes, above the configured limit of {limit} for all-pairs shortest-path measures")]
    TooLarge { nodes: usize, limit: usize },

    #[error("unsupported schema {found}, expected major version {expected}")]
    Schema { found: String, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
