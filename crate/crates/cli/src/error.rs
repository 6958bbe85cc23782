use devsim_core::taxonomy::ClassifyError;
use devsim_core::CoreError;
use devsim_llm::LlmError;
use devsim_metrics::MetricsError;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_BACKEND: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{failed} of {agents} agent(s) failed; outputs are in {out}")]
    AgentsFailed {
        failed: usize,
        agents: usize,
        out: String,
        backend: bool,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 1 for bad input, 2 when the model backend failed.
    pub fn exit_code(&self) -> i32 {
        let backend = match self {
            CliError::Core(e) => e.is_backend(),
            CliError::Classify(ClassifyError::Partial { .. }) => true,
            CliError::Classify(ClassifyError::Setup(e)) => e.is_backend(),
            CliError::Llm(_) => true,
            CliError::AgentsFailed { backend, .. } => *backend,
            _ => false,
        };
        if backend {
            EXIT_BACKEND
        } else {
            EXIT_VALIDATION
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
