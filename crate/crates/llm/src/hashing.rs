//! Local bag-of-words embedder: feature-hash token counts into a fixed
//! dimension and L2-normalize.

use crate::{Embedder, LlmError};

#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(256)
    }
}

// FNV-1a, 64-bit. Stable across platforms and releases, unlike std's hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_one(&self, text: &str) -> Result<Vec<f64>, LlmError> {
        let mut v = vec![0.0; self.dim];
        let mut any = false;
        for token in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let token = token.to_lowercase();
            let slot = (fnv1a(token.as_bytes()) % self.dim as u64) as usize;
            v[slot] += 1.0;
            any = true;
        }
        if !any {
            return Err(LlmError::EmptyText(text.to_string()));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }
}

impl Embedder for HashingEmbedder {
    fn embedder_id(&self) -> String {
        format!("hashing-{}", self.dim)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        if texts.is_empty() {
            return Err(LlmError::InvalidRequest("no texts to embed".into()));
        }
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn same_text_same_vector() {
        let e = HashingEmbedder::default();
        let out = e.embed(&["grit and motivation".into(), "grit and motivation".into()]).unwrap();
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn unit_norm() {
        let v = HashingEmbedder::default().embed_one("online course with AI teacher").unwrap();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn word_order_does_not_matter() {
        let e = HashingEmbedder::default();
        let a = e.embed_one("alpha beta").unwrap();
        let b = e.embed_one("beta alpha").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tokenless_text_is_an_error() {
        assert!(matches!(
            HashingEmbedder::default().embed_one("  -- "),
            Err(LlmError::EmptyText(_))
        ));
        assert!(HashingEmbedder::default().embed(&[]).is_err());
    }
}
