//! Deterministic mock backend.
//!
//! A response is a pure function of `(system_prompt, user_prompt, seed)` and
//! the requested [`ResponseShape`]. Canned rules are checked first and return
//! their fixture text verbatim; otherwise a structurally valid response is
//! synthesized from a ChaCha stream keyed by the request hash.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{
    estimate_tokens, GenerationRequest, GenerationResponse, Generator, LlmError, ResponseShape,
    ShapeKind, TokenUsage,
};

/// A fixture response returned verbatim when the request matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CannedRule {
    /// Only match requests of this shape.
    #[serde(default)]
    pub kind: Option<ShapeKind>,
    /// Only match when the system or user prompt contains this text.
    #[serde(default)]
    pub contains: Option<String>,
    pub response: String,
}

impl CannedRule {
    pub fn for_kind(kind: ShapeKind, response: impl Into<String>) -> Self {
        Self {
            kind: Some(kind),
            contains: None,
            response: response.into(),
        }
    }

    fn matches(&self, request: &GenerationRequest) -> bool {
        if let Some(kind) = self.kind {
            if request.shape.kind() != kind {
                return false;
            }
        }
        match &self.contains {
            Some(needle) => {
                request.system_prompt.contains(needle.as_str())
                    || request.user_prompt.contains(needle.as_str())
            }
            None => true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    rules: Vec<CannedRule>,
}

#[derive(Deserialize)]
struct FixtureFile {
    #[serde(default)]
    rules: Vec<CannedRule>,
}

const OPENERS: &[&str] = &[
    "I think",
    "It seems to me that",
    "Honestly,",
    "From my point of view,",
    "I am wondering whether",
    "I noticed that",
    "Maybe",
    "I agree that",
];

const CLAIMS: &[&str] = &[
    "this idea connects to what we saw on the previous slide",
    "the example with the robot makes the concept much clearer",
    "general intelligence needs more than pattern matching",
    "I need a bit more time to follow the argument",
    "the discussion with the other students helps me stay focused",
    "the definition here is still a little abstract for me",
    "learning with the AI teacher feels more interactive than a video",
    "this part could use a concrete real-world case",
];

const CLOSERS: &[&str] = &[
    "Could the teacher give another example?",
    "I will try to summarize it in my notes.",
    "Does anyone else see it this way?",
    "Let me think about how this applies to my own study.",
    "I would like to hear what the others think.",
    "I am curious about the next slide.",
    "That makes me want to read more about it.",
    "I hope we come back to this later.",
];

const REFLECTIONS: &[&str] = &[
    "I stayed engaged for most of the lesson and the agents answered my questions.",
    "The lesson was interesting, although some parts were hard to follow.",
    "Interacting with the teacher agent helped me organize my thinking.",
    "I mostly listened and only joined the discussion a few times.",
];

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rules(rules: Vec<CannedRule>) -> Self {
        Self { rules }
    }

    pub fn push_rule(&mut self, rule: CannedRule) {
        self.rules.push(rule);
    }

    pub fn rules(&self) -> &[CannedRule] {
        &self.rules
    }

    /// Loads `{"rules": [...]}` fixtures.
    pub fn from_fixture_file(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Other(format!("reading {}: {e}", path.display())))?;
        let file: FixtureFile = serde_json::from_str(&text)
            .map_err(|e| LlmError::Other(format!("parsing {}: {e}", path.display())))?;
        Ok(Self::with_rules(file.rules))
    }

    fn rng_for(request: &GenerationRequest) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(request.system_prompt.as_bytes());
        hasher.update([0u8]);
        hasher.update(request.user_prompt.as_bytes());
        hasher.update([0u8]);
        match request.seed {
            Some(seed) => {
                hasher.update([1u8]);
                hasher.update(seed.to_le_bytes());
            }
            None => hasher.update([0u8]),
        }
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }

    fn synthesize(request: &GenerationRequest) -> String {
        let mut rng = Self::rng_for(request);
        match &request.shape {
            ResponseShape::Text => {
                if rng.random_range(0..8) == 0 {
                    return "continue".to_string();
                }
                format!(
                    "{} {}. {}",
                    OPENERS[rng.random_range(0..OPENERS.len())],
                    CLAIMS[rng.random_range(0..CLAIMS.len())],
                    CLOSERS[rng.random_range(0..CLOSERS.len())]
                )
            }
            ResponseShape::ConceptReport { dimensions } => {
                let mut status = serde_json::Map::new();
                for dim in dimensions {
                    let drift = rng.random_range(-6i64..=8) as f64;
                    let value = (dim.current + drift).round().clamp(0.0, 100.0);
                    status.insert(dim.key.clone(), serde_json::json!(value as i64));
                }
                let body = serde_json::json!({
                    "reflection": REFLECTIONS[rng.random_range(0..REFLECTIONS.len())],
                    "status": status,
                });
                fenced(&body)
            }
            ResponseShape::ScalesReport { dimensions } => {
                let mut scale = serde_json::Map::new();
                for dim in dimensions {
                    let span = dim.max - dim.min;
                    let centre = dim.min + span * (dim.current / 100.0);
                    let answers: Vec<i64> = (0..dim.items)
                        .map(|_| {
                            let jitter = rng.random_range(-1i64..=1) as f64;
                            (centre + jitter).round().clamp(dim.min, dim.max) as i64
                        })
                        .collect();
                    scale.insert(dim.key.clone(), serde_json::json!(answers));
                }
                let body = serde_json::json!({
                    "reflection": REFLECTIONS[rng.random_range(0..REFLECTIONS.len())],
                    "scale": scale,
                });
                fenced(&body)
            }
            ResponseShape::Summary => {
                let tag: u32 = rng.random();
                format!(
                    "Summary {tag:08x}: the student attended the earlier sessions, took part in \
                     the discussion and reported their developmental status after each one."
                )
            }
            ResponseShape::TermCategories { terms } => {
                let categories: Vec<_> = terms
                    .iter()
                    .map(|t| serde_json::json!({"term": t, "category": rng.random_range(0..4u8)}))
                    .collect();
                serde_json::json!({ "categories": categories }).to_string()
            }
        }
    }
}

fn fenced(body: &serde_json::Value) -> String {
    format!(
        "```json\n{}\n```",
        serde_json::to_string_pretty(body).expect("json values always serialize")
    )
}

impl Generator for MockBackend {
    fn backend_id(&self) -> String {
        "mock".to_string()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, LlmError> {
        request.validate()?;
        let text = self
            .rules
            .iter()
            .find(|rule| rule.matches(request))
            .map(|rule| rule.response.clone())
            .unwrap_or_else(|| Self::synthesize(request));
        let usage = TokenUsage {
            prompt: (estimate_tokens(&request.system_prompt) + estimate_tokens(&request.user_prompt))
                as u32,
            completion: estimate_tokens(&text) as u32,
        };
        Ok(GenerationResponse {
            text,
            usage,
            backend_id: self.backend_id(),
            truncated: false,
        })
    }
}
