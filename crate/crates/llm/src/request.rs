use serde::{Deserialize, Serialize};

use crate::LlmError;

/// What structure the caller expects back.
///
/// HTTP backends only use this to decide on JSON mode; the mock backend uses
/// it to synthesize a well-formed response of the right shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseShape {
    #[default]
    Text,
    ConceptReport {
        dimensions: Vec<ReportDimension>,
    },
    ScalesReport {
        dimensions: Vec<ScaleDimension>,
    },
    Summary,
    TermCategories {
        terms: Vec<String>,
    },
}

/// A dimension requested by a concept-mode report, with the agent's current
/// value as an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDimension {
    pub key: String,
    pub current: f64,
}

/// A questionnaire block requested by a scales-mode report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDimension {
    pub key: String,
    pub items: usize,
    pub min: f64,
    pub max: f64,
    /// Current 0-100 value of the dimension.
    pub current: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Text,
    ConceptReport,
    ScalesReport,
    Summary,
    TermCategories,
}

impl ResponseShape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            ResponseShape::Text => ShapeKind::Text,
            ResponseShape::ConceptReport { .. } => ShapeKind::ConceptReport,
            ResponseShape::ScalesReport { .. } => ShapeKind::ScalesReport,
            ResponseShape::Summary => ShapeKind::Summary,
            ResponseShape::TermCategories { .. } => ShapeKind::TermCategories,
        }
    }

    pub fn expects_json(&self) -> bool {
        matches!(
            self,
            ResponseShape::ConceptReport { .. }
                | ResponseShape::ScalesReport { .. }
                | ResponseShape::TermCategories { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: Option<u64>,
    #[serde(default)]
    pub shape: ResponseShape,
}

impl GenerationRequest {
    pub const DEFAULT_TEMPERATURE: f64 = 0.7;
    pub const DEFAULT_MAX_TOKENS: u32 = 1024;

    pub fn new(system_prompt: impl Into<String>, user_prompt: impl Into<String>) -> Self {
        Self {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: Self::DEFAULT_TEMPERATURE,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
            seed: None,
            shape: ResponseShape::Text,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_shape(mut self, shape: ResponseShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.system_prompt.trim().is_empty() {
            return Err(LlmError::InvalidRequest("system prompt is empty".into()));
        }
        if self.user_prompt.trim().is_empty() {
            return Err(LlmError::InvalidRequest("user prompt is empty".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature must be a finite value >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u32,
    pub completion: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub usage: TokenUsage,
    pub backend_id: String,
    /// Set when the backend stopped because it hit `max_tokens`.
    #[serde(default)]
    pub truncated: bool,
}
