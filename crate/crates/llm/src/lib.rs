//! Pluggable generation and embedding backends.
//!
//! Every simulation step talks to a [`Generator`] (and optionally an
//! [`Embedder`]). Two families ship here:
//!
//! * [`MockBackend`] and [`HashingEmbedder`]: pure functions of their inputs,
//!   used by every engine test and by desk runs.
//! * [`HttpBackend`]: an OpenAI-compatible chat-completion / embedding client
//!   with bounded retries and a global in-flight limit.

mod error;
pub mod hashing;
pub mod http;
pub mod mock;
mod request;

pub use error::LlmError;
pub use hashing::HashingEmbedder;
pub use http::{HttpBackend, HttpConfig, Transport, TransportResponse, UreqTransport};
pub use mock::{CannedRule, MockBackend};
pub use request::{
    GenerationRequest, GenerationResponse, ReportDimension, ResponseShape, ScaleDimension,
    ShapeKind, TokenUsage,
};

use sha2::{Digest, Sha256};

/// Text generation, the `L` of the behavior and report steps.
pub trait Generator: Send + Sync {
    /// Stable identifier recorded in run manifests.
    fn backend_id(&self) -> String;

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, LlmError>;
}

/// Dense text embeddings.
pub trait Embedder: Send + Sync {
    fn embedder_id(&self) -> String;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError>;
}

impl<G: Generator + ?Sized> Generator for std::sync::Arc<G> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, LlmError> {
        (**self).generate(request)
    }
}

impl<E: Embedder + ?Sized> Embedder for std::sync::Arc<E> {
    fn embedder_id(&self) -> String {
        (**self).embedder_id()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        (**self).embed(texts)
    }
}

/// Token estimate used whenever a server omits usage: `ceil(chars / 4)`.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Hex SHA-256 of the given parts joined by NUL separators.
pub fn stable_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0u8]);
        }
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_estimate_is_ceiling_of_quarter_chars() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcd"), 1);
        assert_eq!(estimate_tokens("abcdefghi"), 3);
        // counted in characters, not bytes
        assert_eq!(estimate_tokens("学生学习"), 1);
    }

    #[test]
    fn stable_hash_separates_parts() {
        assert_ne!(stable_hash(&["ab", "c"]), stable_hash(&["a", "bc"]));
        assert_eq!(stable_hash(&["x"]).len(), 64);
    }
}
