//! Empirical findings and their retrieval for one agent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use devsim_llm::Embedder;
use serde::{Deserialize, Serialize};

use crate::domain::{DevelopmentalState, DimensionSet, EnvironmentSpec, StudentProfile};
use crate::promptkit::render_score;
use crate::taxonomy::{EmbeddingTable, Taxonomy};
use crate::{CoreError, Result};

pub const DEFAULT_TOP_K: usize = 5;
pub const NO_FINDINGS: &str = "No relevant findings.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-", alias = "−")]
    Negative,
    #[serde(rename = "0")]
    Null,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Positive => "+",
            Direction::Negative => "-",
            Direction::Null => "0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub dimension: String,
    pub standardized_effect: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFinding {
    pub id: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub effects: Vec<Effect>,
    #[serde(default)]
    pub provenance: String,
}

impl EmpiricalFinding {
    fn check(&self, dims: Option<&DimensionSet>) -> Result<()> {
        let bad = |reason: String| CoreError::invalid("finding", format!("`{}`: {reason}", self.id));
        if self.id.trim().is_empty() {
            return Err(CoreError::invalid("finding", "empty id"));
        }
        if self.keywords.iter().all(|k| k.trim().is_empty()) {
            return Err(bad("no keywords".into()));
        }
        for e in &self.effects {
            if !e.standardized_effect.is_finite() {
                return Err(bad(format!("effect on `{}` is not finite", e.dimension)));
            }
            if let Some(dims) = dims {
                let known = dims.dimensions().iter().any(|d| {
                    d.key == e.dimension || d.name.eq_ignore_ascii_case(&e.dimension)
                });
                if !known {
                    return Err(CoreError::UnknownDimension(e.dimension.clone()));
                }
            }
        }
        Ok(())
    }

    fn normalized_keywords(&self) -> BTreeSet<String> {
        self.keywords.iter().map(|k| k.trim().to_lowercase()).collect()
    }

    /// Text embedded for similarity retrieval when no vector is supplied.
    pub fn embedding_text(&self) -> String {
        format!("{}\n{}", self.description, self.keywords.join(", "))
    }
}

/// Read-only findings collection with optional per-record embeddings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FindingsStore {
    records: Vec<EmpiricalFinding>,
    embeddings: Option<Vec<Vec<f64>>>,
}

impl FindingsStore {
    /// Pass `dims` to check that every effect names a declared dimension.
    pub fn new(records: Vec<EmpiricalFinding>, dims: Option<&DimensionSet>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for r in &records {
            r.check(dims)?;
            if !ids.insert(r.id.as_str()) {
                return Err(CoreError::invalid("findings", format!("duplicate id `{}`", r.id)));
            }
        }
        Ok(Self {
            records,
            embeddings: None,
        })
    }

    pub fn parse_jsonl(text: &str, source: &str, dims: Option<&DimensionSet>) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(line).map_err(|e| CoreError::Format {
                path: source.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            records.push(record);
        }
        Self::new(records, dims)
    }

    pub fn load(path: &Path, dims: Option<&DimensionSet>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        Self::parse_jsonl(&text, &path.display().to_string(), dims)
    }

    /// Attaches vectors keyed by finding id. Every record needs one.
    pub fn with_embeddings(mut self, table: &EmbeddingTable) -> Result<Self> {
        let vectors = self
            .records
            .iter()
            .map(|r| {
                table
                    .get(&r.id)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| CoreError::invalid("findings embeddings", format!("no vector for `{}`", r.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.embeddings = Some(vectors);
        Ok(self)
    }

    /// Embeds every record's description and keywords with `embedder`.
    pub fn embed_with(mut self, embedder: &dyn Embedder) -> Result<Self> {
        let texts: Vec<String> = self.records.iter().map(EmpiricalFinding::embedding_text).collect();
        let vectors = if texts.is_empty() { Vec::new() } else { embedder.embed(&texts)? };
        if vectors.len() != texts.len() {
            return Err(CoreError::invalid(
                "findings embeddings",
                format!("embedder returned {} vectors for {} texts", vectors.len(), texts.len()),
            ));
        }
        if let Some(first) = vectors.first() {
            for (r, v) in self.records.iter().zip(&vectors) {
                if v.len() != first.len() {
                    return Err(CoreError::DimensionMismatch {
                        item: r.id.clone(),
                        expected: first.len(),
                        got: v.len(),
                    });
                }
            }
        }
        self.embeddings = Some(vectors);
        Ok(self)
    }

    pub fn records(&self) -> &[EmpiricalFinding] {
        &self.records
    }

    pub fn embeddings(&self) -> Option<&[Vec<f64>]> {
        self.embeddings.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<&EmpiricalFinding> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMethod {
    #[default]
    Keywords,
    Embedding,
}

impl FromStr for RetrievalMethod {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "keywords" | "keyword" => Ok(RetrievalMethod::Keywords),
            "embedding" | "embeddings" => Ok(RetrievalMethod::Embedding),
            _ => Err(CoreError::invalid("retrieval method", format!("unknown method `{s}`"))),
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(CoreError::invalid("k", "must be at least 1"));
    }
    Ok(())
}

/// Findings ranked by keyword overlap with the agent. Findings sharing no
/// keyword are left out.
pub fn retrieve_by_keywords<'a>(
    agent_keywords: &BTreeSet<String>,
    store: &'a FindingsStore,
    k: usize,
) -> Result<Vec<(&'a EmpiricalFinding, usize)>> {
    check_k(k)?;
    let agent: BTreeSet<String> = agent_keywords.iter().map(|k| k.trim().to_lowercase()).collect();
    let mut scored: Vec<(&EmpiricalFinding, usize)> = store
        .records
        .iter()
        .map(|r| (r, r.normalized_keywords().intersection(&agent).count()))
        .filter(|(_, s)| *s > 0)
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.id.cmp(&b.0.id)));
    scored.truncate(k);
    Ok(scored)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (norm(u) * norm(v))).clamp(-1.0, 1.0)
}

/// Findings ranked by cosine similarity between `query_vector` and the
/// stored embeddings.
pub fn retrieve_by_vector<'a>(
    query_vector: &[f64],
    store: &'a FindingsStore,
    k: usize,
) -> Result<Vec<(&'a EmpiricalFinding, f64)>> {
    check_k(k)?;
    if store.is_empty() {
        return Ok(Vec::new());
    }
    let vectors = store
        .embeddings
        .as_ref()
        .ok_or_else(|| CoreError::invalid("findings", "store has no embeddings"))?;
    if !(norm(query_vector) > 0.0) {
        return Err(CoreError::ZeroNorm("query".into()));
    }
    let mut scored = Vec::with_capacity(vectors.len());
    for (r, v) in store.records.iter().zip(vectors) {
        if v.len() != query_vector.len() {
            return Err(CoreError::DimensionMismatch {
                item: r.id.clone(),
                expected: query_vector.len(),
                got: v.len(),
            });
        }
        if !(norm(v) > 0.0) {
            return Err(CoreError::ZeroNorm(r.id.clone()));
        }
        scored.push((r, cosine_similarity(query_vector, v)));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.id.cmp(&b.0.id)));
    scored.truncate(k);
    Ok(scored)
}

/// Embeds `query_text` and ranks the store against it. A store without
/// vectors is embedded on the fly with the same embedder.
pub fn retrieve_by_embedding<'a>(
    query_text: &str,
    store: &'a FindingsStore,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<(&'a EmpiricalFinding, f64)>> {
    check_k(k)?;
    if store.is_empty() {
        return Ok(Vec::new());
    }
    let query = embedder
        .embed(&[query_text.to_string()])?
        .into_iter()
        .next()
        .ok_or_else(|| CoreError::invalid("embedding", "embedder returned no vector"))?;
    if store.embeddings.is_some() {
        return retrieve_by_vector(&query, store, k);
    }
    let embedded = store.clone().embed_with(embedder)?;
    let ranked = retrieve_by_vector(&query, &embedded, k)?;
    Ok(ranked
        .into_iter()
        .map(|(f, s)| (store.get(&f.id).expect("same records"), s))
        .collect())
}

fn format_effect(value: f64) -> String {
    format!("{value:+.2}")
}

/// Numbered paragraphs, one per finding, in the given order.
pub fn format_findings(findings: &[&EmpiricalFinding]) -> String {
    if findings.is_empty() {
        return NO_FINDINGS.to_string();
    }
    let mut out = String::new();
    for (i, f) in findings.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}. {}", i + 1, f.description.trim());
        for e in &f.effects {
            let _ = writeln!(
                out,
                "   {}: standardized effect {} ({})",
                e.dimension,
                format_effect(e.standardized_effect),
                e.direction.symbol()
            );
        }
    }
    out.trim_end().to_string()
}

fn padded_words(text: &str) -> String {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    format!(" {} ", cleaned.split_whitespace().collect::<Vec<_>>().join(" "))
}

/// Keyword set of an agent in its environment: environment and endowment
/// values, every taxonomy term occurring in them as whole words, and the
/// labels of the declared dimensions.
pub fn agent_keywords(
    env: &EnvironmentSpec,
    profile: &StudentProfile,
    dims: &DimensionSet,
    taxonomy: &Taxonomy,
) -> BTreeSet<String> {
    let values: Vec<&str> = env
        .subcategory_values
        .values()
        .flatten()
        .map(String::as_str)
        .chain(profile.endowment.values().map(String::as_str))
        .collect();
    let mut out: BTreeSet<String> = values.iter().map(|v| v.trim().to_lowercase()).collect();
    let haystack: String = values.iter().map(|v| padded_words(v)).collect();
    for term in taxonomy.all_terms() {
        let needle = padded_words(term);
        if needle.trim().is_empty() {
            continue;
        }
        if haystack.contains(&needle) {
            out.insert(term.to_string());
        }
    }
    out.extend(dims.dimensions().iter().map(|d| d.label()));
    out.retain(|k| !k.is_empty());
    out
}

/// Query text for similarity retrieval: the environment narrative followed
/// by a summary of the agent's background and current developmental state.
pub fn agent_query(
    env: &EnvironmentSpec,
    profile: &StudentProfile,
    dev: &DevelopmentalState,
    dims: &DimensionSet,
) -> String {
    let mut out = env.narrative.trim().to_string();
    out.push_str("\nStudent background: ");
    let background: Vec<String> = profile.endowment.iter().map(|(k, v)| format!("{k} {v}")).collect();
    out.push_str(&background.join("; "));
    out.push_str("\nDevelopmental status: ");
    let status: Vec<String> = dims
        .dimensions()
        .iter()
        .filter_map(|d| dev.score(&d.key).map(|s| format!("{} {}", d.label(), render_score(s))))
        .collect();
    out.push_str(&status.join("; "));
    out
}

/// Per-agent retrieval through the configured method.
pub fn retrieve_for_agent<'a>(
    method: RetrievalMethod,
    store: &'a FindingsStore,
    k: usize,
    embedder: Option<&dyn Embedder>,
    ctx: AgentContext<'_>,
) -> Result<Vec<&'a EmpiricalFinding>> {
    match method {
        RetrievalMethod::Keywords => {
            let keys = agent_keywords(ctx.env, ctx.profile, ctx.dims, ctx.taxonomy);
            Ok(retrieve_by_keywords(&keys, store, k)?.into_iter().map(|(f, _)| f).collect())
        }
        RetrievalMethod::Embedding => {
            let embedder = embedder
                .ok_or_else(|| CoreError::invalid("retrieval", "embedding retrieval needs an embedder"))?;
            let query = agent_query(ctx.env, ctx.profile, ctx.dev, ctx.dims);
            Ok(retrieve_by_embedding(&query, store, k, embedder)?
                .into_iter()
                .map(|(f, _)| f)
                .collect())
        }
    }
}

#[derive(Clone, Copy)]
pub struct AgentContext<'a> {
    pub env: &'a EnvironmentSpec,
    pub profile: &'a StudentProfile,
    pub dev: &'a DevelopmentalState,
    pub dims: &'a DimensionSet,
    pub taxonomy: &'a Taxonomy,
}

/// Vectors keyed by finding id, for sidecar files.
pub fn embeddings_by_id(store: &FindingsStore) -> BTreeMap<&str, &[f64]> {
    match &store.embeddings {
        Some(vs) => store
            .records
            .iter()
            .zip(vs)
            .map(|(r, v)| (r.id.as_str(), v.as_slice()))
            .collect(),
        None => BTreeMap::new(),
    }
}
