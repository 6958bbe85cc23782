//! The general education categorization and the pipeline that builds one
//! from a document corpus: term extraction, coarse classification by a
//! language model, and clustering of term embeddings.

mod classify;
mod cluster;
mod embeddings;
mod terms;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

pub use classify::{
    coarse_classify, coarse_classify_with, parse_categories, ClassifyError, DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_IN_FLIGHT,
};
pub use cluster::{
    cluster_terms, cosine_distance, sample_for_card_sort, CardSortSample, Cluster, ClusterResult,
    DEFAULT_CUT_THRESHOLD,
};
pub use embeddings::{read_embeddings, write_embeddings, EmbeddingTable};
pub use terms::{default_stopwords, extract_terms, tokenize, CoarseCategory, Document, TermRecord};

const DEFAULT_TAXONOMY: &str = include_str!("../../assets/taxonomy.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    LearningEnvironment,
    EndowmentDimensions,
    DevelopmentalDimensions,
}

impl Branch {
    pub const ALL: [Branch; 3] = [
        Branch::LearningEnvironment,
        Branch::EndowmentDimensions,
        Branch::DevelopmentalDimensions,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Branch::LearningEnvironment => "Learning Environment",
            Branch::EndowmentDimensions => "Endowment Dimensions",
            Branch::DevelopmentalDimensions => "Developmental Dimensions",
        }
    }

    /// The coarse-classification code of terms belonging to this branch.
    pub fn code(self) -> CoarseCategory {
        match self {
            Branch::LearningEnvironment => CoarseCategory::Environment,
            Branch::EndowmentDimensions => CoarseCategory::Endowment,
            Branch::DevelopmentalDimensions => CoarseCategory::Developmental,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcategory {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub terms: Vec<String>,
}

/// Three branches, each a list of subcategories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawTaxonomy")]
pub struct Taxonomy {
    learning_environment: Vec<Subcategory>,
    endowment_dimensions: Vec<Subcategory>,
    developmental_dimensions: Vec<Subcategory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTaxonomy {
    learning_environment: Vec<Subcategory>,
    endowment_dimensions: Vec<Subcategory>,
    developmental_dimensions: Vec<Subcategory>,
}

impl TryFrom<RawTaxonomy> for Taxonomy {
    type Error = CoreError;

    fn try_from(raw: RawTaxonomy) -> Result<Self> {
        Taxonomy::new(
            raw.learning_environment,
            raw.endowment_dimensions,
            raw.developmental_dimensions,
        )
    }
}

impl Taxonomy {
    pub fn new(
        learning_environment: Vec<Subcategory>,
        endowment_dimensions: Vec<Subcategory>,
        developmental_dimensions: Vec<Subcategory>,
    ) -> Result<Self> {
        let t = Self {
            learning_environment,
            endowment_dimensions,
            developmental_dimensions,
        };
        for branch in Branch::ALL {
            let mut names = BTreeSet::new();
            let mut ids = BTreeSet::new();
            for sub in t.branch(branch) {
                if !names.insert(sub.name.to_lowercase()) || !ids.insert(sub.id.as_str()) {
                    return Err(CoreError::invalid(
                        "taxonomy",
                        format!("subcategory `{}` repeated in {}", sub.name, branch.title()),
                    ));
                }
                for term in &sub.terms {
                    if term.trim().is_empty() || *term != term.to_lowercase() {
                        return Err(CoreError::invalid(
                            "taxonomy",
                            format!("term `{term}` in `{}` must be non-empty lowercase", sub.name),
                        ));
                    }
                }
            }
        }
        Ok(t)
    }

    /// The shipped categorization: 14 environment, 13 endowment and 8
    /// developmental subcategories with their descriptions and example terms.
    pub fn default_taxonomy() -> Self {
        serde_json::from_str(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CoreError::json(path.display().to_string(), e))
    }

    pub fn branch(&self, branch: Branch) -> &[Subcategory] {
        match branch {
            Branch::LearningEnvironment => &self.learning_environment,
            Branch::EndowmentDimensions => &self.endowment_dimensions,
            Branch::DevelopmentalDimensions => &self.developmental_dimensions,
        }
    }

    pub fn subcategory_count(&self) -> usize {
        Branch::ALL.iter().map(|b| self.branch(*b).len()).sum()
    }

    /// Looks a subcategory up by id or display name, ignoring case.
    pub fn find(&self, branch: Branch, key: &str) -> Option<&Subcategory> {
        self.branch(branch)
            .iter()
            .find(|s| s.id.eq_ignore_ascii_case(key) || s.name.eq_ignore_ascii_case(key))
    }

    /// Every term of every branch, deduplicated and sorted.
    pub fn all_terms(&self) -> BTreeSet<&str> {
        Branch::ALL
            .iter()
            .flat_map(|b| self.branch(*b))
            .flat_map(|s| s.terms.iter().map(String::as_str))
            .collect()
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::default_taxonomy()
    }
}
