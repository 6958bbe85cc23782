use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../assets/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

/// Coarse domain codes used by the classification prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CoarseCategory {
    #[default]
    Other = 0,
    Environment = 1,
    Endowment = 2,
    Developmental = 3,
}

impl From<CoarseCategory> for u8 {
    fn from(c: CoarseCategory) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for CoarseCategory {
    type Error = String;

    fn try_from(code: u8) -> std::result::Result<Self, String> {
        match code {
            0 => Ok(CoarseCategory::Other),
            1 => Ok(CoarseCategory::Environment),
            2 => Ok(CoarseCategory::Endowment),
            3 => Ok(CoarseCategory::Developmental),
            other => Err(format!("category code {other} is not in 0..=3")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub term: String,
    pub frequency: usize,
    #[serde(default)]
    pub coarse_category: CoarseCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

/// Lowercase alphabetic runs of at least three letters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| t.chars().count() >= 3)
        .map(str::to_lowercase)
}

/// Corpus-wide term frequencies over the abstracts, filtered by stopwords and
/// `min_frequency`, most frequent first with ties in lexicographic order.
pub fn extract_terms(
    documents: &[Document],
    stopwords: &BTreeSet<String>,
    min_frequency: usize,
) -> Result<Vec<TermRecord>> {
    if documents.is_empty() {
        return Err(CoreError::Empty("corpus"));
    }
    if min_frequency == 0 {
        return Err(CoreError::invalid("min_frequency", "must be at least 1"));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        for token in tokenize(&doc.abstract_text) {
            if !stopwords.contains(&token) {
                *counts.entry(token).or_default() += 1;
            }
        }
    }
    let mut out: Vec<TermRecord> = counts
        .into_iter()
        .filter(|(_, n)| *n >= min_frequency)
        .map(|(term, frequency)| TermRecord {
            term,
            frequency,
            coarse_category: CoarseCategory::Other,
            vector: None,
        })
        .collect();
    out.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.term.cmp(&b.term)));
    Ok(out)
}
