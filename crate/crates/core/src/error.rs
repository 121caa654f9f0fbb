use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("shape error: expected {expected}, got {rows}x{cols}")]
    Shape {
        expected: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("resource guard: total {total} exceeds cap {cap}")]
    ResourceGuard { total: f64, cap: f64 },

    #[error("undefined indicator: {0}")]
    UndefinedIndicator(String),

    /// An aggregated 2x2 entry of the generalized LL matrix was undefined.
    #[error("undefined GLL entry at split ({j},{k}): {reason}")]
    UndefinedGllEntry { j: usize, k: usize, reason: String },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("infeasible counterfactual: {reason}")]
    Infeasible {
        reason: String,
        /// Offending cell (row, col, value), when one exists.
        cell: Option<(usize, usize, f64)>,
    },

    #[error("undefined weight: {0}")]
    UndefinedWeight(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {message}")]
    Validation { line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn infeasible(reason: impl Into<String>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            cell: None,
        }
    }

    /// Wrap with a location label such as `"Ohio 1970s"`.
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.root(), Error::Infeasible { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
