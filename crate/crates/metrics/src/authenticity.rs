//! Aggregation of externally collected authenticity ratings. Ratings are
//! gathered elsewhere (expert interviews); this only summarizes them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{MetricsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthenticityRating {
    pub rater: String,
    pub agent_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single rating.
    pub sd: f64,
}

pub fn ingest_authenticity_ratings(
    records: &[AuthenticityRating],
    scale: (f64, f64),
) -> Result<BTreeMap<String, RatingSummary>> {
    if records.is_empty() {
        return Err(MetricsError::Empty("authenticity ratings"));
    }
    let (min, max) = scale;
    let mut by_agent: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        if !(r.score >= min && r.score <= max) {
            return Err(MetricsError::OutOfScale {
                value: r.score,
                min,
                max,
            });
        }
        by_agent.entry(r.agent_id.clone()).or_default().push(r.score);
    }
    Ok(by_agent
        .into_iter()
        .map(|(agent, scores)| {
            let n = scores.len();
            let mean = scores.iter().sum::<f64>() / n as f64;
            let sd = if n < 2 {
                0.0
            } else {
                (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
            };
            (agent, RatingSummary { n, mean, sd })
        })
        .collect())
}
