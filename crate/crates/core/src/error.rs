use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: i64 },

    #[error("line {line}: vertex id {id} out of range")]
    VertexOutOfRange { line: usize, id: i64 },

    #[error("vertex {0} is out of range for this graph")]
    UnknownVertex(usize),

    #[error("community {0} is empty")]
    EmptyCommunity(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("vertex {0} has no out-going edges")]
    SinkVertex(usize),

    #[error("graph not strongly connected; required by {0}")]
    NotStronglyConnected(&'static str),

    #[error("graph not connected; required by {0}")]
    NotConnected(&'static str),

    #[error("{0} requires an undirected graph")]
    RequiresUndirected(&'static str),

    #[error("{0} requires a directed graph")]
    RequiresDirected(&'static str),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("graph has {n} vertices; dense routines accept at most {max}")]
    TooLarge { n: usize, max: usize },

    #[error("zero-norm coordinate vector for {0}")]
    ZeroNorm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex universes differ ({0} vs {1})")]
    UniverseMismatch(usize, usize),

    #[error("membership expansion exceeded {0} passes")]
    PassLimit(usize),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::Svd(_) | Error::ZeroNorm(_) | Error::PassLimit(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
