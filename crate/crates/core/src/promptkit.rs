//! Prompt assembly from the framework components.
//!
//! Templates are plain text with `[name]` placeholders. Substitution is a
//! single left-to-right pass, so inserted content is never re-scanned.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{
    ActionSpec, Dimension, DimensionSet, DevelopmentalState, EnvironmentSpec, StudentProfile,
};
use crate::taxonomy::{Branch, Taxonomy};
use crate::{CoreError, Result};

pub use devsim_llm::estimate_tokens;

pub const EMPTY_HISTORY: &str = "(no prior interactions)";
pub const EMPTY_CHAT: &str = "(no messages yet)";
pub const EMPTY_ENDOWMENT: &str = "(none recorded)";
pub const SUMMARY_SYSTEM_PROMPT: &str =
    "You maintain compact learning histories for simulated students.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateRole {
    System,
    Behavior,
    ReportConcept,
    ReportScales,
    Summary,
    Classify,
}

impl TemplateRole {
    pub const ALL: [TemplateRole; 6] = [
        TemplateRole::System,
        TemplateRole::Behavior,
        TemplateRole::ReportConcept,
        TemplateRole::ReportScales,
        TemplateRole::Summary,
        TemplateRole::Classify,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateRole::System => "system.txt",
            TemplateRole::Behavior => "behavior.txt",
            TemplateRole::ReportConcept => "report_concept.txt",
            TemplateRole::ReportScales => "report_scales.txt",
            TemplateRole::Summary => "summary.txt",
            TemplateRole::Classify => "classify.txt",
        }
    }

    fn default_body(self) -> &'static str {
        match self {
            TemplateRole::System => include_str!("../assets/templates/system.txt"),
            TemplateRole::Behavior => include_str!("../assets/templates/behavior.txt"),
            TemplateRole::ReportConcept => include_str!("../assets/templates/report_concept.txt"),
            TemplateRole::ReportScales => include_str!("../assets/templates/report_scales.txt"),
            TemplateRole::Summary => include_str!("../assets/templates/summary.txt"),
            TemplateRole::Classify => include_str!("../assets/templates/classify.txt"),
        }
    }

    /// Fixed component slots a template of this role may use. System
    /// templates may additionally name any dimension or trait.
    fn components(self) -> &'static [&'static str] {
        match self {
            TemplateRole::System => &[
                "name",
                "course",
                "environment",
                "endowment",
                "developmental",
                "traits",
                "actions",
                "findings",
                "history",
            ],
            TemplateRole::Behavior => &["slide", "chat"],
            TemplateRole::ReportConcept => &["behavior", "dimension list", "status fields"],
            TemplateRole::ReportScales => &[
                "behavior",
                "target dimension",
                "target dimension description",
                "target dimension scales",
            ],
            TemplateRole::Summary => &["summary", "period"],
            TemplateRole::Classify => &["terms"],
        }
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn is_placeholder_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, ' ' | '_' | '-'))
}

fn parse(body: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        match after.find(']') {
            Some(close) if is_placeholder_name(&after[..close]) => {
                if open > 0 {
                    pieces.push(Piece::Text(&rest[..open]));
                }
                pieces.push(Piece::Slot(&after[..close]));
                rest = &after[close + 1..];
            }
            _ => {
                pieces.push(Piece::Text(&rest[..open + 1]));
                rest = after;
            }
        }
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest));
    }
    pieces
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    pub role: TemplateRole,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(id: impl Into<String>, role: TemplateRole, body: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            role,
            body: body.into(),
        }
    }

    pub fn builtin(role: TemplateRole) -> Self {
        Self::new("default", role, role.default_body())
    }

    /// Placeholder names in order of appearance, repeats included.
    pub fn placeholders(&self) -> Vec<&str> {
        parse(&self.body)
            .into_iter()
            .filter_map(|p| match p {
                Piece::Slot(name) => Some(name),
                Piece::Text(_) => None,
            })
            .collect()
    }

    /// Checks that every placeholder names a known component for the role.
    pub fn validate(&self, dims: &DimensionSet) -> Result<()> {
        let fixed = self.role.components();
        for name in self.placeholders() {
            let dimension_slot = self.role == TemplateRole::System
                && (dims.dimensions().iter().any(|d| d.label() == name)
                    || dims.traits().iter().any(|t| t.to_lowercase() == name));
            if !fixed.contains(&name) && !dimension_slot {
                return Err(CoreError::invalid(
                    "template",
                    format!("`{}` ({:?}) uses unknown placeholder [{name}]", self.id, self.role),
                ));
            }
        }
        Ok(())
    }

    pub fn render(&self, values: &BTreeMap<String, String>) -> Result<String> {
        let mut out = String::with_capacity(self.body.len());
        for piece in parse(&self.body) {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => match values.get(name) {
                    Some(v) => out.push_str(v),
                    None => return Err(CoreError::UnresolvedPlaceholder(name.to_string())),
                },
            }
        }
        Ok(out)
    }

    pub fn hash(&self) -> String {
        devsim_llm::stable_hash(&[&self.id, &format!("{:?}", self.role), &self.body])
    }
}

/// One template per role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub id: String,
    templates: BTreeMap<TemplateRole, PromptTemplate>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self {
            id: "default".into(),
            templates: TemplateRole::ALL
                .iter()
                .map(|r| (*r, PromptTemplate::builtin(*r)))
                .collect(),
        }
    }

    /// Reads `<role>.txt` files from `dir`; roles without a file keep the
    /// built-in text. The set id is the directory name.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(CoreError::invalid(
                "template directory",
                format!("{} is not a directory", dir.display()),
            ));
        }
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "templates".into());
        let mut set = Self::builtin();
        set.id = id.clone();
        for role in TemplateRole::ALL {
            let path = dir.join(role.file_name());
            if path.is_file() {
                let body = std::fs::read_to_string(&path).map_err(|e| CoreError::io(&path, e))?;
                set.templates
                    .insert(role, PromptTemplate::new(id.clone(), role, body));
            }
        }
        Ok(set)
    }

    pub fn get(&self, role: TemplateRole) -> &PromptTemplate {
        &self.templates[&role]
    }

    pub fn set(&mut self, template: PromptTemplate) {
        self.templates.insert(template.role, template);
    }

    pub fn validate(&self, dims: &DimensionSet) -> Result<()> {
        self.templates.values().try_for_each(|t| t.validate(dims))
    }

    /// Content hashes per role, recorded in run manifests.
    pub fn hashes(&self) -> BTreeMap<TemplateRole, String> {
        self.templates.iter().map(|(r, t)| (*r, t.hash())).collect()
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    #[default]
    Concept,
    Scales,
}

impl FromStr for ReportMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "concept" => Ok(ReportMode::Concept),
            "scales" => Ok(ReportMode::Scales),
            _ => Err(CoreError::UnknownMode(s.to_string())),
        }
    }
}

impl std::fmt::Display for ReportMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReportMode::Concept => "concept",
            ReportMode::Scales => "scales",
        })
    }
}

/// Developmental and trait values are shown as whole numbers.
pub fn render_score(value: f64) -> String {
    format!("{}", value.round() as i64)
}

/// Everything the system prompt draws on for one agent at one period.
pub struct PromptContext<'a> {
    pub env: &'a EnvironmentSpec,
    pub profile: &'a StudentProfile,
    pub dev: &'a DevelopmentalState,
    pub dims: &'a DimensionSet,
    pub taxonomy: &'a Taxonomy,
    pub actions: &'a ActionSpec,
    pub findings_block: &'a str,
    pub history_block: &'a str,
}

pub fn render_environment(env: &EnvironmentSpec, taxonomy: &Taxonomy) -> String {
    let mut out = env.narrative.trim_end().to_string();
    if !env.subcategory_values.is_empty() {
        out.push_str("\n\nEnvironment details:");
        for (id, values) in &env.subcategory_values {
            let name = taxonomy
                .find(Branch::LearningEnvironment, id)
                .map_or(id.as_str(), |s| s.name.as_str());
            let _ = write!(out, "\n- {name}: {}", values.join(", "));
        }
    }
    out
}

pub fn render_endowment(profile: &StudentProfile, taxonomy: &Taxonomy) -> String {
    if profile.endowment.is_empty() {
        return EMPTY_ENDOWMENT.to_string();
    }
    profile
        .endowment
        .iter()
        .map(|(key, value)| {
            let name = taxonomy
                .find(Branch::EndowmentDimensions, key)
                .map_or(key.as_str(), |s| s.name.as_str());
            format!("{name}: {value}")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_actions(actions: &ActionSpec) -> String {
    actions
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{}. {}", i + 1, r.instructions.trim()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn system_values(ctx: &PromptContext<'_>) -> BTreeMap<String, String> {
    let mut v = BTreeMap::new();
    v.insert("name".into(), ctx.profile.name.clone());
    v.insert("course".into(), ctx.env.name.clone());
    let mut developmental = Vec::new();
    for dim in ctx.dims.dimensions() {
        let value = ctx
            .dev
            .score(&dim.key)
            .map_or_else(|| "unknown".to_string(), render_score);
        developmental.push(format!("{}: {value}", dim.name));
        v.insert(dim.label(), value);
    }
    v.insert("developmental".into(), developmental.join("\n"));
    let mut traits = Vec::new();
    for name in ctx.dims.traits() {
        let value = ctx
            .profile
            .trait_value(name)
            .map_or_else(|| "unknown".to_string(), render_score);
        traits.push(format!("{name}: {value}"));
        v.insert(name.to_lowercase(), value);
    }
    v.insert("traits".into(), traits.join("\n"));
    v.insert("endowment".into(), render_endowment(ctx.profile, ctx.taxonomy));
    v.insert("environment".into(), render_environment(ctx.env, ctx.taxonomy));
    v.insert("actions".into(), render_actions(ctx.actions));
    v.insert("findings".into(), ctx.findings_block.trim_end().to_string());
    let history = if ctx.history_block.trim().is_empty() {
        EMPTY_HISTORY.to_string()
    } else {
        ctx.history_block.trim_end().to_string()
    };
    v.insert("history".into(), history);
    v
}

pub fn build_system_prompt(ctx: &PromptContext<'_>, template: &PromptTemplate) -> Result<String> {
    template.render(&system_values(ctx))
}

/// The per-slide user prompt.
pub fn build_behavior_prompt(slide: &str, chat: &str, template: &PromptTemplate) -> Result<String> {
    let chat = if chat.trim().is_empty() { EMPTY_CHAT } else { chat };
    let values = BTreeMap::from([
        ("slide".to_string(), slide.trim_end().to_string()),
        ("chat".to_string(), chat.trim_end().to_string()),
    ]);
    template.render(&values)
}

fn scale_description(dims: &[&Dimension]) -> Result<String> {
    let mut out = String::new();
    for (i, dim) in dims.iter().enumerate() {
        if dim.items.is_empty() {
            return Err(CoreError::invalid(
                "scales report",
                format!("dimension `{}` has no questionnaire items", dim.key),
            ));
        }
        if i > 0 {
            out.push('\n');
        }
        if !dim.description.is_empty() {
            let _ = writeln!(out, "{}: {}", dim.name, dim.description);
        }
        let _ = writeln!(
            out,
            "Rate each statement from {} (strongly disagree) to {} (strongly agree).",
            render_score(dim.scale_min),
            render_score(dim.scale_max)
        );
        for (k, item) in dim.items.iter().enumerate() {
            let _ = writeln!(out, "{}. {item}", k + 1);
        }
    }
    Ok(out.trim_end().to_string())
}

fn scale_slots(dim: &Dimension) -> String {
    let slots: Vec<String> = (1..=dim.items.len())
        .map(|k| {
            format!(
                "<{}-{} for item {k}>",
                render_score(dim.scale_min),
                render_score(dim.scale_max)
            )
        })
        .collect();
    format!("[{}]", slots.join(", "))
}

/// Self-report task text for `dims`.
///
/// Concept mode asks for a 0-100 value per dimension. Scales mode shows the
/// questionnaire items and asks for item-level answers; with one dimension
/// the answers are a plain array, with several an object keyed by dimension.
pub fn build_report_prompt(
    mode: ReportMode,
    dims: &[&Dimension],
    behavior_block: &str,
    template: &PromptTemplate,
) -> Result<String> {
    if dims.is_empty() {
        return Err(CoreError::Empty("report dimensions"));
    }
    let mut values = BTreeMap::new();
    values.insert("behavior".to_string(), behavior_block.trim_end().to_string());
    match mode {
        ReportMode::Concept => {
            let list: Vec<String> = dims.iter().map(|d| format!("- {}", d.label())).collect();
            values.insert("dimension list".into(), list.join("\n"));
            let fields: Vec<String> = dims
                .iter()
                .map(|d| format!("        \"{}\": 0 to 100", d.key))
                .collect();
            values.insert("status fields".into(), fields.join(",\n"));
        }
        ReportMode::Scales => {
            let names: Vec<&str> = dims.iter().map(|d| d.name.as_str()).collect();
            values.insert("target dimension".into(), names.join(", "));
            values.insert("target dimension description".into(), scale_description(dims)?);
            let scales = if dims.len() == 1 {
                scale_slots(dims[0])
            } else {
                let fields: Vec<String> = dims
                    .iter()
                    .map(|d| format!("        \"{}\": {}", d.key, scale_slots(d)))
                    .collect();
                format!("{{\n{}\n    }}", fields.join(",\n"))
            };
            values.insert("target dimension scales".into(), scales);
        }
    }
    template.render(&values)
}

pub fn build_summary_prompt(summary: &str, period: &str, template: &PromptTemplate) -> Result<String> {
    let previous = if summary.trim().is_empty() { "(none)" } else { summary };
    let values = BTreeMap::from([
        ("summary".to_string(), previous.trim_end().to_string()),
        ("period".to_string(), period.trim_end().to_string()),
    ]);
    template.render(&values)
}

pub fn build_classify_prompt(terms: &[String], template: &PromptTemplate) -> Result<String> {
    let values = BTreeMap::from([("terms".to_string(), terms.join("\n"))]);
    template.render(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ActionRule;

    struct Fixture {
        env: EnvironmentSpec,
        profile: StudentProfile,
        dev: DevelopmentalState,
        dims: DimensionSet,
        taxonomy: Taxonomy,
        actions: ActionSpec,
    }

    fn fixture() -> Fixture {
        let dims = DimensionSet::case_study();
        let scores: BTreeMap<String, f64> = [
            ("motivation", 62.4),
            ("academic_self_efficacy", 55.0),
            ("grit", 48.6),
            ("self_regulated_learning", 71.0),
            ("technology_acceptance", 83.0),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
        let profile = StudentProfile {
            agent_id: "s01".into(),
            name: "Lin".into(),
            endowment: BTreeMap::from([("gender".to_string(), "female".to_string())]),
            traits: dims.traits().iter().map(|t| (t.clone(), 50.0)).collect(),
            scores: scores.clone(),
            attributes: BTreeMap::new(),
        };
        Fixture {
            env: EnvironmentSpec {
                name: "Towards General Artificial Intelligence".into(),
                subcategory_values: BTreeMap::new(),
                narrative: "An online classroom with slides and a chat area.".into(),
            },
            dev: DevelopmentalState::new(0, scores, &dims).unwrap(),
            profile,
            dims,
            taxonomy: Taxonomy::default_taxonomy(),
            actions: ActionSpec {
                rules: vec![ActionRule {
                    trigger: "each slide".into(),
                    modality: "chat".into(),
                    instructions: "Act according to your profile.".into(),
                }],
            },
        }
    }

    fn system(f: &Fixture, findings: &str, history: &str) -> String {
        let ctx = PromptContext {
            env: &f.env,
            profile: &f.profile,
            dev: &f.dev,
            dims: &f.dims,
            taxonomy: &f.taxonomy,
            actions: &f.actions,
            findings_block: findings,
            history_block: history,
        };
        build_system_prompt(&ctx, &PromptTemplate::builtin(TemplateRole::System)).unwrap()
    }

    #[test]
    fn system_prompt_renders_profile_values_as_integers() {
        let out = system(&fixture(), "No relevant findings.", "");
        assert!(out.contains("Technology Acceptance: 83\n"));
        assert!(out.contains("Motivation: 62\n"));
        assert!(out.contains("Grit: 49\n"));
        assert!(out.contains("Gender: female"));
        assert!(out.contains("Course: Towards General Artificial Intelligence"));
        assert!(out.contains("1. Act according to your profile."));
    }

    #[test]
    fn empty_history_uses_placeholder_text() {
        let out = system(&fixture(), "", "");
        assert!(out.trim_end().ends_with(EMPTY_HISTORY));
    }

    #[test]
    fn sections_follow_profile_instructions_findings_history() {
        let out = system(&fixture(), "FINDINGS-BLOCK", "HISTORY-BLOCK");
        let pos = |s: &str| out.find(s).unwrap();
        assert!(pos("# Your Profile") < pos("# Platform Instruction"));
        assert!(pos("# Platform Instruction") < pos("FINDINGS-BLOCK"));
        assert!(pos("FINDINGS-BLOCK") < pos("HISTORY-BLOCK"));
    }

    #[test]
    fn system_prompt_is_deterministic_and_fully_resolved() {
        let f = fixture();
        let a = system(&f, "x", "y");
        assert_eq!(a, system(&f, "x", "y"));
        assert!(PromptTemplate::new("t", TemplateRole::System, a.clone()).placeholders().is_empty());
    }

    #[test]
    fn every_component_changes_the_prompt() {
        let base_fixture = fixture();
        let base = system(&base_fixture, "F", "H");
        let mut variants = Vec::new();
        let mut f = fixture();
        f.env.narrative.push_str(" More.");
        variants.push(system(&f, "F", "H"));
        let mut f = fixture();
        f.env
            .subcategory_values
            .insert("technology".into(), vec!["virtual reality".into()]);
        variants.push(system(&f, "F", "H"));
        let mut f = fixture();
        f.profile.endowment.insert("region".into(), "rural".into());
        variants.push(system(&f, "F", "H"));
        let mut f = fixture();
        let mut scores = f.dev.scores().clone();
        scores.insert("grit".into(), 10.0);
        f.dev = DevelopmentalState::new(0, scores, &f.dims).unwrap();
        variants.push(system(&f, "F", "H"));
        let mut f = fixture();
        f.actions.rules[0].instructions = "Stay quiet.".into();
        variants.push(system(&f, "F", "H"));
        variants.push(system(&base_fixture, "F2", "H"));
        variants.push(system(&base_fixture, "F", "H2"));
        for v in variants {
            assert_ne!(v, base);
        }
    }

    #[test]
    fn unresolved_placeholder_is_named() {
        let t = PromptTemplate::new("t", TemplateRole::Behavior, "Look at [slide] and [mystery].");
        let values = BTreeMap::from([("slide".to_string(), "s".to_string())]);
        match t.render(&values) {
            Err(CoreError::UnresolvedPlaceholder(name)) => assert_eq!(name, "mystery"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn substituted_text_is_not_rescanned() {
        let t = PromptTemplate::new("t", TemplateRole::Behavior, "[slide]|[chat]");
        let out = build_behavior_prompt("[chat]", "hello", &t).unwrap();
        assert_eq!(out, "[chat]|hello");
    }

    #[test]
    fn brackets_that_are_not_names_stay_literal() {
        let t = PromptTemplate::new("t", TemplateRole::Behavior, "answers [1, 3, 5] for [slide]");
        assert_eq!(t.placeholders(), vec!["slide"]);
    }

    #[test]
    fn concept_report_lists_dimensions_and_bound() {
        let dims = DimensionSet::case_study();
        let refs: Vec<&Dimension> = dims.dimensions().iter().collect();
        let out = build_report_prompt(
            ReportMode::Concept,
            &refs,
            "lesson",
            &PromptTemplate::builtin(TemplateRole::ReportConcept),
        )
        .unwrap();
        for name in [
            "motivation",
            "academic self-efficacy",
            "grit",
            "self-regulated learning",
            "technology acceptance",
        ] {
            assert!(out.contains(&format!("- {name}\n")), "{name}");
        }
        assert!(out.contains("between 0 and 100"));
        assert!(out.contains("\"technology_acceptance\": 0 to 100\n    }"));
    }

    #[test]
    fn scales_report_renders_one_slot_per_item() {
        let dims = DimensionSet::case_study();
        let grit = dims.get("grit").unwrap();
        let out = build_report_prompt(
            ReportMode::Scales,
            &[grit],
            "lesson",
            &PromptTemplate::builtin(TemplateRole::ReportScales),
        )
        .unwrap();
        assert_eq!(out.matches("<1-5 for item").count(), 3);
        assert!(out.contains("post-test for Grit after the course"));
        for item in &grit.items {
            assert!(out.contains(item.as_str()));
        }
    }

    #[test]
    fn scales_report_without_items_fails_and_unknown_mode_fails() {
        let mut d = DimensionSet::case_study().get("grit").unwrap().clone();
        d.items.clear();
        assert!(build_report_prompt(
            ReportMode::Scales,
            &[&d],
            "",
            &PromptTemplate::builtin(TemplateRole::ReportScales)
        )
        .is_err());
        assert!(matches!("survey".parse::<ReportMode>(), Err(CoreError::UnknownMode(_))));
        assert_eq!("Scales".parse::<ReportMode>().unwrap(), ReportMode::Scales);
    }

    #[test]
    fn builtin_templates_validate() {
        TemplateSet::builtin().validate(&DimensionSet::case_study()).unwrap();
        let bad = PromptTemplate::new("t", TemplateRole::Behavior, "[history]");
        assert!(bad.validate(&DimensionSet::case_study()).is_err());
    }

    #[test]
    fn token_estimates() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcd"), 1);
        assert_eq!(estimate_tokens("abcdefghi"), 3);
    }

    #[test]
    fn classify_prompt_lists_terms() {
        let out = build_classify_prompt(
            &["motivation".into(), "tablet".into()],
            &PromptTemplate::builtin(TemplateRole::Classify),
        )
        .unwrap();
        assert!(out.ends_with("categorized:\nmotivation\ntablet\n"));
        assert!(out.contains("\"category\": <1 or 2 or 3 or 0>"));
    }
}
