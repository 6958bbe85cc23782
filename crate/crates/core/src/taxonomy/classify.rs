use std::collections::BTreeMap;

use devsim_llm::{GenerationRequest, Generator, ResponseShape};
use rayon::prelude::*;
use serde_json::Value;

use super::CoarseCategory;
use crate::promptkit::{build_classify_prompt, PromptTemplate, TemplateRole};
use crate::CoreError;

pub const DEFAULT_BATCH_SIZE: usize = 50;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

const CLASSIFY_SYSTEM_PROMPT: &str = "You classify education research terms.";

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Setup(#[from] CoreError),
    /// Some batches failed at the backend. `completed` holds the codes of
    /// every batch that did finish.
    #[error("{} of {total_batches} batches failed; first failure: {source}", failed_batches.len())]
    Partial {
        completed: BTreeMap<String, CoarseCategory>,
        failed_batches: Vec<usize>,
        total_batches: usize,
        source: CoreError,
    },
}

fn json_object(text: &str) -> Option<Value> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    serde_json::from_str(&text[start..=end]).ok()
}

fn category_code(v: &Value) -> Option<CoarseCategory> {
    let code = match v {
        Value::Number(n) => n.as_u64()?,
        Value::String(s) => s.trim().parse().ok()?,
        _ => return None,
    };
    u8::try_from(code).ok().and_then(|c| CoarseCategory::try_from(c).ok())
}

/// Codes for `batch` read from a classification response. Terms the
/// response omits or codes invalidly fall back to `Other`; the second value
/// lists one warning per fallback.
pub fn parse_categories(
    text: &str,
    batch: &[String],
) -> (BTreeMap<String, CoarseCategory>, Vec<String>) {
    let mut found: BTreeMap<String, CoarseCategory> = BTreeMap::new();
    let mut warnings = Vec::new();
    match json_object(text) {
        Some(value) => {
            let entries = value
                .get("categories")
                .and_then(Value::as_array)
                .cloned()
                .unwrap_or_default();
            for entry in entries {
                let Some(term) = entry.get("term").and_then(Value::as_str) else {
                    continue;
                };
                let term = term.trim().to_lowercase();
                match entry.get("category").and_then(category_code) {
                    Some(code) => {
                        found.entry(term).or_insert(code);
                    }
                    None => warnings.push(format!("term `{term}` has an invalid category code")),
                }
            }
        }
        None => warnings.push("classification response contains no JSON object".to_string()),
    }
    let mut out = BTreeMap::new();
    for term in batch {
        let code = match found.get(&term.to_lowercase()) {
            Some(code) => *code,
            None => {
                warnings.push(format!("term `{term}` missing from response, coded 0"));
                CoarseCategory::Other
            }
        };
        out.insert(term.clone(), code);
    }
    (out, warnings)
}

/// Codes every term with the built-in prompt, at most
/// [`DEFAULT_MAX_IN_FLIGHT`] batches at a time.
pub fn coarse_classify(
    terms: &[String],
    batch_size: usize,
    backend: &dyn Generator,
) -> Result<BTreeMap<String, CoarseCategory>, ClassifyError> {
    coarse_classify_with(
        terms,
        batch_size,
        backend,
        &PromptTemplate::builtin(TemplateRole::Classify),
        DEFAULT_MAX_IN_FLIGHT,
    )
}

pub fn coarse_classify_with(
    terms: &[String],
    batch_size: usize,
    backend: &dyn Generator,
    template: &PromptTemplate,
    max_in_flight: usize,
) -> Result<BTreeMap<String, CoarseCategory>, ClassifyError> {
    if batch_size == 0 {
        return Err(CoreError::invalid("batch_size", "must be at least 1").into());
    }
    if max_in_flight == 0 {
        return Err(CoreError::invalid("max_in_flight", "must be at least 1").into());
    }
    let batches: Vec<&[String]> = terms.chunks(batch_size).collect();
    let requests: Vec<GenerationRequest> = batches
        .iter()
        .enumerate()
        .map(|(i, batch)| {
            let prompt = build_classify_prompt(batch, template)?;
            Ok(GenerationRequest::new(CLASSIFY_SYSTEM_PROMPT, prompt)
                .with_seed(i as u64)
                .with_temperature(0.0)
                .with_shape(ResponseShape::TermCategories {
                    terms: batch.to_vec(),
                }))
        })
        .collect::<Result<_, CoreError>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight)
        .build()
        .map_err(|e| CoreError::invalid("thread pool", e.to_string()))?;
    let responses: Vec<_> = pool.install(|| {
        requests
            .par_iter()
            .map(|r| backend.generate(r))
            .collect()
    });

    let mut completed = BTreeMap::new();
    let mut failed_batches = Vec::new();
    let mut first_error = None;
    for (i, response) in responses.into_iter().enumerate() {
        match response {
            Ok(resp) => {
                let (codes, warnings) = parse_categories(&resp.text, batches[i]);
                for w in warnings {
                    log::warn!("batch {i}: {w}");
                }
                completed.extend(codes);
            }
            Err(e) => {
                failed_batches.push(i);
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        None => Ok(completed),
        Some(e) => Err(ClassifyError::Partial {
            completed,
            failed_batches,
            total_batches: batches.len(),
            source: CoreError::Backend(e),
        }),
    }
}
