//! Framework types: environment E, endowment W, developmental state D,
//! actions A, behaviors B, and the per-agent aggregate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::History;
use crate::taxonomy::{Branch, Taxonomy};
use crate::{CoreError, Result};

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 100.0;

/// Linear map of a raw questionnaire value onto 0-100.
pub fn standardize_score(raw: f64, scale_min: f64, scale_max: f64) -> Result<f64> {
    if !(scale_max > scale_min) {
        return Err(CoreError::DegenerateScale {
            min: scale_min,
            max: scale_max,
        });
    }
    if !(raw >= scale_min && raw <= scale_max) {
        return Err(CoreError::OutOfScale {
            value: raw,
            min: scale_min,
            max: scale_max,
        });
    }
    Ok(100.0 * (raw - scale_min) / (scale_max - scale_min))
}

/// One developmental dimension with its questionnaire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    /// snake_case identifier used in files and structured responses.
    pub key: String,
    /// Display name, e.g. "Academic Self-Efficacy".
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Likert items for scales-mode reports.
    #[serde(default)]
    pub items: Vec<String>,
    #[serde(default = "default_scale_min")]
    pub scale_min: f64,
    #[serde(default = "default_scale_max")]
    pub scale_max: f64,
}

fn default_scale_min() -> f64 {
    1.0
}

fn default_scale_max() -> f64 {
    5.0
}

impl Dimension {
    /// Lowercase display name, the form used in prompts and template slots.
    pub fn label(&self) -> String {
        self.name.to_lowercase()
    }
}

/// The declared developmental dimensions of a cohort plus the personality
/// traits carried alongside the endowment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDimensionSet")]
pub struct DimensionSet {
    dimensions: Vec<Dimension>,
    traits: Vec<String>,
}

#[derive(Deserialize)]
struct RawDimensionSet {
    dimensions: Vec<Dimension>,
    #[serde(default)]
    traits: Vec<String>,
}

impl TryFrom<RawDimensionSet> for DimensionSet {
    type Error = CoreError;

    fn try_from(raw: RawDimensionSet) -> Result<Self> {
        DimensionSet::new(raw.dimensions, raw.traits)
    }
}

impl DimensionSet {
    pub fn new(dimensions: Vec<Dimension>, traits: Vec<String>) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(CoreError::Empty("dimension set"));
        }
        let mut seen = BTreeSet::new();
        for d in &dimensions {
            let well_formed = !d.key.is_empty()
                && d.key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
            if !well_formed {
                return Err(CoreError::invalid(
                    "dimension key",
                    format!("`{}` must be non-empty snake_case", d.key),
                ));
            }
            if !seen.insert(d.key.as_str()) {
                return Err(CoreError::invalid(
                    "dimension key",
                    format!("`{}` declared twice", d.key),
                ));
            }
            if !(d.scale_max > d.scale_min) {
                return Err(CoreError::DegenerateScale {
                    min: d.scale_min,
                    max: d.scale_max,
                });
            }
        }
        Ok(Self { dimensions, traits })
    }

    /// The five dimensions of the classroom case study and the Big Five
    /// traits, each dimension with a three-item 1-5 questionnaire.
    pub fn case_study() -> Self {
        let dim = |key: &str, name: &str, description: &str, items: [&str; 3]| Dimension {
            key: key.to_string(),
            name: name.to_string(),
            description: description.to_string(),
            items: items.iter().map(|s| s.to_string()).collect(),
            scale_min: 1.0,
            scale_max: 5.0,
        };
        let dimensions = vec![
            dim(
                "motivation",
                "Motivation",
                "How much you want to learn the course content.",
                [
                    "I want to learn more about the topics of this course.",
                    "I find the course content interesting.",
                    "I put effort into this course because I care about it.",
                ],
            ),
            dim(
                "academic_self_efficacy",
                "Academic Self-Efficacy",
                "How confident you are that you can master the course.",
                [
                    "I am confident I can understand the hardest material in this course.",
                    "I can do well in this course if I try.",
                    "I can solve the problems presented in this course.",
                ],
            ),
            dim(
                "grit",
                "Grit",
                "How persistently you pursue long-term learning goals.",
                [
                    "I finish whatever I begin in my studies.",
                    "Setbacks in learning do not discourage me.",
                    "I keep working on a difficult topic until I understand it.",
                ],
            ),
            dim(
                "self_regulated_learning",
                "Self-Regulated Learning",
                "How well you plan, monitor and adjust your own learning.",
                [
                    "I set goals for what I want to learn in each lesson.",
                    "I check whether I understand the material while studying.",
                    "I change my study strategy when it is not working.",
                ],
            ),
            dim(
                "technology_acceptance",
                "Technology Acceptance",
                "How useful and easy you find learning with this technology.",
                [
                    "Learning with this platform is useful to me.",
                    "The platform is easy to use.",
                    "I would like to keep using AI-supported courses.",
                ],
            ),
        ];
        let traits = ["Neuroticism", "Conscientiousness", "Agreeableness", "Openness", "Extraversion"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self { dimensions, traits }
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn traits(&self) -> &[String] {
        &self.traits
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.dimensions.iter().map(|d| d.key.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.key == key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    /// Converts raw questionnaire scores to 0-100 with each dimension's scale.
    pub fn standardize(&self, raw: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        raw.iter()
            .map(|(key, value)| {
                let dim = self
                    .get(key)
                    .ok_or_else(|| CoreError::UnknownDimension(key.clone()))?;
                Ok((key.clone(), standardize_score(*value, dim.scale_min, dim.scale_max)?))
            })
            .collect()
    }
}

impl Default for DimensionSet {
    fn default() -> Self {
        Self::case_study()
    }
}

/// D_t: developmental scores at period index `timepoint`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct DevelopmentalState {
    timepoint: u32,
    scores: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct RawState {
    timepoint: u32,
    scores: BTreeMap<String, f64>,
}

impl TryFrom<RawState> for DevelopmentalState {
    type Error = CoreError;

    fn try_from(raw: RawState) -> Result<Self> {
        DevelopmentalState::unchecked_dims(raw.timepoint, raw.scores)
    }
}

fn check_score(what: &'static str, dimension: &str, value: f64) -> Result<()> {
    if (SCORE_MIN..=SCORE_MAX).contains(&value) {
        Ok(())
    } else {
        Err(CoreError::OutOfRange {
            what,
            dimension: dimension.to_string(),
            value,
        })
    }
}

impl DevelopmentalState {
    /// Builds a state holding exactly the declared dimensions, each in [0, 100].
    pub fn new(timepoint: u32, scores: BTreeMap<String, f64>, dims: &DimensionSet) -> Result<Self> {
        for key in scores.keys() {
            if !dims.contains(key) {
                return Err(CoreError::UnknownDimension(key.clone()));
            }
        }
        if let Some(missing) = dims.keys().find(|k| !scores.contains_key(*k)) {
            return Err(CoreError::invalid(
                "developmental state",
                format!("missing dimension `{missing}`"),
            ));
        }
        Self::unchecked_dims(timepoint, scores)
    }

    fn unchecked_dims(timepoint: u32, scores: BTreeMap<String, f64>) -> Result<Self> {
        for (key, value) in &scores {
            check_score("score", key, *value)?;
        }
        Ok(Self { timepoint, scores })
    }

    pub fn timepoint(&self) -> u32 {
        self.timepoint
    }

    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    pub fn score(&self, key: &str) -> Option<f64> {
        self.scores.get(key).copied()
    }

    /// Same scores at another timepoint.
    pub fn at(&self, timepoint: u32) -> Self {
        Self {
            timepoint,
            scores: self.scores.clone(),
        }
    }
}

/// E: the learning environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub name: String,
    /// Learning-environment subcategory id to its values.
    #[serde(default)]
    pub subcategory_values: BTreeMap<String, Vec<String>>,
    pub narrative: String,
}

impl EnvironmentSpec {
    pub fn validate(&self, taxonomy: &Taxonomy) -> Result<()> {
        if self.narrative.trim().is_empty() {
            return Err(CoreError::invalid("environment", "narrative is empty"));
        }
        for id in self.subcategory_values.keys() {
            if taxonomy.find(Branch::LearningEnvironment, id).is_none() {
                return Err(CoreError::invalid(
                    "environment",
                    format!("`{id}` is not a learning-environment subcategory"),
                ));
            }
        }
        Ok(())
    }
}

/// W: values never change once the profile is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndowmentProfile {
    agent_id: String,
    subcategory_values: BTreeMap<String, String>,
}

impl EndowmentProfile {
    pub fn new(agent_id: impl Into<String>, subcategory_values: BTreeMap<String, String>) -> Self {
        Self {
            agent_id: agent_id.into(),
            subcategory_values,
        }
    }

    pub fn agent_id(&self) -> &str {
        &self.agent_id
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.subcategory_values
    }

    pub fn is_immutable(&self) -> bool {
        true
    }
}

/// One interaction rule of A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRule {
    pub trigger: String,
    pub modality: String,
    pub instructions: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub rules: Vec<ActionRule>,
}

impl ActionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(CoreError::Empty("action rules"));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            for (field, text) in [
                ("trigger", &rule.trigger),
                ("modality", &rule.modality),
                ("instructions", &rule.instructions),
            ] {
                if text.trim().is_empty() {
                    return Err(CoreError::invalid(
                        "action rule",
                        format!("rule {} has an empty {field}", i + 1),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeakerRole {
    Student,
    Teacher,
    Peer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub role: SpeakerRole,
    pub text: String,
}

/// B_t: what the agent did during one period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorRecord {
    pub agent_id: String,
    pub timepoint: u32,
    pub utterances: Vec<Utterance>,
    /// Set when the agent only answered "continue".
    pub pass: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// One row of the profiles file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub agent_id: String,
    pub name: String,
    /// Endowment subcategory id (or name) to value.
    #[serde(default)]
    pub endowment: BTreeMap<String, String>,
    /// Personality traits on 0-100.
    #[serde(default)]
    pub traits: BTreeMap<String, f64>,
    /// Initial developmental scores on 0-100.
    #[serde(default)]
    pub scores: BTreeMap<String, f64>,
    /// Other numeric attributes usable as strata (message counts, pre-test).
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

impl StudentProfile {
    pub fn endowment_profile(&self) -> EndowmentProfile {
        EndowmentProfile::new(self.agent_id.clone(), self.endowment.clone())
    }

    pub fn initial_state(&self, dims: &DimensionSet) -> Result<DevelopmentalState> {
        DevelopmentalState::new(0, self.scores.clone(), dims)
    }

    pub fn trait_value(&self, name: &str) -> Option<f64> {
        self.traits
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| *v)
    }
}

/// One simulated student between periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub profile: StudentProfile,
    pub dev: DevelopmentalState,
    pub history: History,
    pub rng_seed: u64,
}

impl AgentState {
    pub fn agent_id(&self) -> &str {
        &self.profile.agent_id
    }

    pub fn completed_periods(&self) -> u32 {
        self.dev.timepoint()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

/// Every invariant a profile breaks. An empty list means the profile is valid.
pub fn validate_profile(
    profile: &StudentProfile,
    taxonomy: &Taxonomy,
    dims: &DimensionSet,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field: String, rule: String| out.push(Violation { field, rule });
    if profile.agent_id.trim().is_empty() {
        push("agent_id".into(), "must be non-empty".into());
    }
    for (key, value) in &profile.scores {
        if !dims.contains(key) {
            push(format!("scores.{key}"), "not a declared dimension".into());
        } else if !(SCORE_MIN..=SCORE_MAX).contains(value) {
            push(format!("scores.{key}"), format!("{value} outside [0, 100]"));
        }
    }
    for key in dims.keys() {
        if !profile.scores.contains_key(key) {
            push(format!("scores.{key}"), "missing initial score".into());
        }
    }
    for (name, value) in &profile.traits {
        if !(SCORE_MIN..=SCORE_MAX).contains(value) {
            push(format!("traits.{name}"), format!("{value} outside [0, 100]"));
        }
    }
    for (key, value) in &profile.endowment {
        if taxonomy.find(Branch::EndowmentDimensions, key).is_none() {
            push(
                format!("endowment.{key}"),
                "not an endowment subcategory".into(),
            );
        }
        if value.trim().is_empty() {
            push(format!("endowment.{key}"), "empty value".into());
        }
    }
    out
}
