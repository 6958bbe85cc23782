use devsim_llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("degenerate scale: min {min} equals max {max}")]
    DegenerateScale { min: f64, max: f64 },
    #[error("raw score {value} lies outside the scale [{min}, {max}]")]
    OutOfScale { value: f64, min: f64, max: f64 },
    #[error("{what} {value} for `{dimension}` is outside [0, 100]")]
    OutOfRange {
        what: &'static str,
        dimension: String,
        value: f64,
    },
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
    #[error("term `{0}` has a zero-norm vector")]
    ZeroNorm(String),
    #[error("vector dimension mismatch: expected {expected}, got {got} for `{item}`")]
    DimensionMismatch {
        item: String,
        expected: usize,
        got: usize,
    },
    #[error("unresolved placeholder [{0}]")]
    UnresolvedPlaceholder(String),
    #[error("unknown report mode `{0}`")]
    UnknownMode(String),
    #[error("report could not be parsed ({reason}); raw response: {raw}")]
    UnparsableReport { reason: String, raw: String },
    #[error("token budget {budget} cannot hold the latest period ({needed} tokens)")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error("backend failure: {0}")]
    Backend(#[from] LlmError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Format {
        path: String,
        line: usize,
        reason: String,
    },
}

impl CoreError {
    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        CoreError::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        CoreError::Json {
            context: context.into(),
            source,
        }
    }

    /// True when the failure came from the generation backend.
    pub fn is_backend(&self) -> bool {
        matches!(self, CoreError::Backend(_))
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
