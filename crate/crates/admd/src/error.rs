use std::path::PathBuf;

/// Error type shared by every operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum AdmdError {
    #[error("input contains non-finite values")]
    NonFinite,

    #[error("snapshot matrix needs at least 2 columns, got {got}")]
    TooFewSnapshots { got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("delay window q={q} requires q <= N-1 = {max} (N = {n} snapshots)")]
    InsufficientSnapshots { q: usize, n: usize, max: usize },

    #[error("sketch dimension a={a} exceeds state dimension M={m}")]
    SketchTooLarge { a: usize, m: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero singular value retained at index {index}; truncate to the numeric rank")]
    SingularTruncation { index: usize },

    #[error("degenerate data: the first snapshot block is identically zero")]
    DegenerateData,

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear algebra backend error: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    #[error("config error at line {line}: {what}")]
    Config { line: usize, what: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {} at byte {offset}: {what}", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        what: String,
    },
}

impl AdmdError {
    /// Process exit code for the CLI: 2 usage, 3 data/format, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            AdmdError::InvalidParameter(_) => 2,
            AdmdError::NonFinite
            | AdmdError::TooFewSnapshots { .. }
            | AdmdError::InvalidInput(_)
            | AdmdError::InsufficientSnapshots { .. }
            | AdmdError::SketchTooLarge { .. }
            | AdmdError::DimensionMismatch(_)
            | AdmdError::Config { .. }
            | AdmdError::Io { .. }
            | AdmdError::Format { .. } => 3,
            AdmdError::SingularTruncation { .. }
            | AdmdError::DegenerateData
            | AdmdError::NonConvergence { .. }
            | AdmdError::Backend(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, AdmdError>;
