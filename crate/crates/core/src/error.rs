use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. Degenerate systems carry a rendered summary
/// of the degeneracy report so callers can branch on them without generics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rank: {0}")]
    InvalidRank(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("unsupported rank {rank}: {reason}")]
    UnsupportedRank { rank: usize, reason: &'static str },

    #[error("singular matrix (rank {rank} of {size})")]
    SingularMatrix {
        size: usize,
        rank: usize,
        /// Column index and |pivot| for each elimination step that succeeded.
        pivots: Vec<(usize, f64)>,
    },

    #[error("singular system: {summary}")]
    SingularSystem { summary: String },

    #[error("trace matrix is singular: {summary}")]
    GammaSingular { summary: String },

    #[error("reduced system is singular: {summary}")]
    SingularReduced { summary: String },

    #[error("source tensor is inconsistent with the declared symmetry (residual {residual:e})")]
    SymmetryViolation { residual: f64 },

    #[error("oracle scale guard exceeded: {size} unknowns (limit {limit})")]
    ScaleGuard { size: usize, limit: usize },

    #[error("metric is not symmetric (max asymmetry {0:e})")]
    MetricNotSymmetric(f64),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for the errors that indicate a mathematically degenerate system
    /// rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::SingularSystem { .. }
                | Error::GammaSingular { .. }
                | Error::SingularReduced { .. }
        )
    }
}
