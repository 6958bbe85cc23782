//! Self-report requests and parsing of their structured answers.

use std::collections::BTreeMap;

use devsim_llm::{
    stable_hash, GenerationRequest, Generator, ReportDimension, ResponseShape, ScaleDimension,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::domain::{standardize_score, BehaviorRecord, Dimension, DimensionSet, DevelopmentalState};
use crate::promptkit::{build_report_prompt, ReportMode, TemplateRole, TemplateSet};
use crate::{CoreError, Result};

const REASK_REMINDER: &str =
    "Your previous answer could not be read. Answer again with only the JSON object described above, inside a ```json fenced block.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedReport {
    pub reflection: String,
    pub scores: BTreeMap<String, f64>,
}

/// One report call and its answers, a second answer only after a re-ask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportExchange {
    pub dimensions: Vec<String>,
    pub prompt_hash: String,
    pub responses: Vec<String>,
    pub reflection: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOutcome {
    pub state: DevelopmentalState,
    pub exchanges: Vec<ReportExchange>,
}

fn unparsable(reason: impl Into<String>, raw: &str) -> CoreError {
    CoreError::UnparsableReport {
        reason: reason.into(),
        raw: raw.to_string(),
    }
}

/// The JSON object of a response: the first fenced block when there is one,
/// otherwise the outermost braces.
pub fn extract_json_block(text: &str) -> Option<&str> {
    if let Some(open) = text.find("```") {
        let after = &text[open + 3..];
        let body_start = after.find('\n').map_or(0, |i| i + 1);
        let body = &after[body_start..];
        if let Some(close) = body.find("```") {
            let inner = body[..close].trim();
            if inner.starts_with('{') {
                return Some(inner);
            }
        }
    }
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

fn parse_object(text: &str) -> Result<Map<String, Value>> {
    let block = extract_json_block(text).ok_or_else(|| unparsable("no JSON object found", text))?;
    match serde_json::from_str::<Value>(block) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(unparsable("top-level value is not an object", text)),
        Err(e) => Err(unparsable(format!("invalid JSON: {e}"), text)),
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn field<'a>(map: &'a Map<String, Value>, dim: &Dimension) -> Option<&'a Value> {
    map.get(&dim.key).or_else(|| {
        map.iter()
            .find(|(k, _)| {
                let k = k.trim();
                k.eq_ignore_ascii_case(&dim.name) || k.eq_ignore_ascii_case(&dim.key.replace('_', " "))
            })
            .map(|(_, v)| v)
    })
}

fn reflection(map: &Map<String, Value>) -> String {
    map.get("reflection")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .trim()
        .to_string()
}

/// Reads `{"reflection", "status": {dimension: value}}`. Values outside
/// 0-100 are rejected, not clamped.
pub fn parse_concept_report(text: &str, dims: &[&Dimension]) -> Result<ParsedReport> {
    let map = parse_object(text)?;
    let status = map
        .get("status")
        .and_then(Value::as_object)
        .ok_or_else(|| unparsable("missing `status` object", text))?;
    let mut scores = BTreeMap::new();
    for dim in dims {
        let raw = field(status, dim).ok_or_else(|| unparsable(format!("no value for `{}`", dim.key), text))?;
        let value = number(raw)
            .filter(|v| v.is_finite())
            .ok_or_else(|| unparsable(format!("value for `{}` is not a number", dim.key), text))?;
        if !(0.0..=100.0).contains(&value) {
            return Err(CoreError::OutOfRange {
                what: "reported value",
                dimension: dim.key.clone(),
                value,
            });
        }
        scores.insert(dim.key.clone(), value);
    }
    Ok(ParsedReport {
        reflection: reflection(&map),
        scores,
    })
}

fn score_items(dim: &Dimension, answers: &Value, text: &str) -> Result<f64> {
    let items = answers
        .as_array()
        .ok_or_else(|| unparsable(format!("answers for `{}` are not a list", dim.key), text))?;
    if items.len() != dim.items.len() {
        return Err(unparsable(
            format!(
                "`{}` has {} answers for {} items",
                dim.key,
                items.len(),
                dim.items.len()
            ),
            text,
        ));
    }
    let mut total = 0.0;
    for item in items {
        let raw = number(item)
            .filter(|v| v.is_finite())
            .ok_or_else(|| unparsable(format!("an answer for `{}` is not a number", dim.key), text))?;
        total += standardize_score(raw, dim.scale_min, dim.scale_max)?;
    }
    Ok(total / items.len() as f64)
}

/// Reads `{"reflection", "scale": answers}` where `answers` is the item list
/// itself for a single dimension, or an object of lists keyed by dimension.
/// Each dimension scores the mean of its standardized items.
pub fn parse_scales_report(text: &str, dims: &[&Dimension]) -> Result<ParsedReport> {
    let map = parse_object(text)?;
    let scale = map
        .get("scale")
        .ok_or_else(|| unparsable("missing `scale` field", text))?;
    let mut scores = BTreeMap::new();
    match scale {
        Value::Array(_) if dims.len() == 1 => {
            scores.insert(dims[0].key.clone(), score_items(dims[0], scale, text)?);
        }
        Value::Object(per_dim) => {
            for dim in dims {
                let answers = field(per_dim, dim)
                    .ok_or_else(|| unparsable(format!("no answers for `{}`", dim.key), text))?;
                scores.insert(dim.key.clone(), score_items(dim, answers, text)?);
            }
        }
        _ => return Err(unparsable("`scale` has an unexpected shape", text)),
    }
    Ok(ParsedReport {
        reflection: reflection(&map),
        scores,
    })
}

pub struct ReportSettings<'a> {
    pub system_prompt: &'a str,
    /// What happened during the lesson, shown in the report prompt.
    pub lesson: &'a str,
    pub dims: &'a DimensionSet,
    pub templates: &'a TemplateSet,
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: u64,
}

fn shape_for(mode: ReportMode, dims: &[&Dimension], current: &DevelopmentalState) -> ResponseShape {
    let now = |d: &Dimension| current.score(&d.key).unwrap_or(50.0);
    match mode {
        ReportMode::Concept => ResponseShape::ConceptReport {
            dimensions: dims
                .iter()
                .map(|d| ReportDimension {
                    key: d.key.clone(),
                    current: now(d),
                })
                .collect(),
        },
        ReportMode::Scales => ResponseShape::ScalesReport {
            dimensions: dims
                .iter()
                .map(|d| ScaleDimension {
                    key: d.key.clone(),
                    items: d.items.len(),
                    min: d.scale_min,
                    max: d.scale_max,
                    current: now(d),
                })
                .collect(),
        },
    }
}

fn ask(
    mode: ReportMode,
    dims: &[&Dimension],
    current: &DevelopmentalState,
    backend: &dyn Generator,
    settings: &ReportSettings<'_>,
    seed: u64,
) -> Result<(ParsedReport, ReportExchange)> {
    let role = match mode {
        ReportMode::Concept => TemplateRole::ReportConcept,
        ReportMode::Scales => TemplateRole::ReportScales,
    };
    let prompt = build_report_prompt(mode, dims, settings.lesson, settings.templates.get(role))?;
    let parse = |text: &str| match mode {
        ReportMode::Concept => parse_concept_report(text, dims),
        ReportMode::Scales => parse_scales_report(text, dims),
    };
    let mut exchange = ReportExchange {
        dimensions: dims.iter().map(|d| d.key.clone()).collect(),
        prompt_hash: stable_hash(&[settings.system_prompt, &prompt]),
        responses: Vec::new(),
        reflection: String::new(),
    };
    let request = |user: String, seed: u64| {
        GenerationRequest::new(settings.system_prompt, user)
            .with_seed(seed)
            .with_temperature(settings.temperature)
            .with_max_tokens(settings.max_tokens)
            .with_shape(shape_for(mode, dims, current))
    };
    let first = backend.generate(&request(prompt.clone(), seed))?;
    exchange.responses.push(first.text.clone());
    let parsed = match parse(&first.text) {
        Ok(p) => p,
        Err(CoreError::UnparsableReport { reason, .. }) => {
            log::warn!("report for {:?} unreadable ({reason}); asking again", exchange.dimensions);
            let retry = format!("{prompt}\n\n{REASK_REMINDER}");
            let second = backend.generate(&request(retry, seed.wrapping_add(1)))?;
            exchange.responses.push(second.text.clone());
            parse(&second.text)?
        }
        Err(e) => return Err(e),
    };
    exchange.reflection = parsed.reflection.clone();
    Ok((parsed, exchange))
}

/// D_{t+1} from the agent's self-report on the lesson it just had.
///
/// Concept mode asks once for every dimension. Scales mode asks once per
/// dimension with that dimension's questionnaire. An unreadable answer is
/// asked for again once; a second failure carries the raw text.
pub fn predict_development(
    current: &DevelopmentalState,
    behavior: &BehaviorRecord,
    mode: ReportMode,
    backend: &dyn Generator,
    settings: &ReportSettings<'_>,
) -> Result<ReportOutcome> {
    let dims: Vec<&Dimension> = settings.dims.dimensions().iter().collect();
    let groups: Vec<Vec<&Dimension>> = match mode {
        ReportMode::Concept => vec![dims],
        ReportMode::Scales => dims.into_iter().map(|d| vec![d]).collect(),
    };
    let mut scores = BTreeMap::new();
    let mut exchanges = Vec::new();
    for (i, group) in groups.iter().enumerate() {
        let seed = settings.seed.wrapping_add(2 * i as u64);
        let (parsed, exchange) = ask(mode, group, current, backend, settings, seed)?;
        scores.extend(parsed.scores);
        exchanges.push(exchange);
    }
    let state = DevelopmentalState::new(behavior.timepoint, scores, settings.dims)?;
    Ok(ReportOutcome { state, exchanges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use devsim_llm::{CannedRule, MockBackend, ShapeKind};

    fn dims() -> DimensionSet {
        DimensionSet::case_study()
    }

    fn refs(d: &DimensionSet) -> Vec<&Dimension> {
        d.dimensions().iter().collect()
    }

    fn state(v: f64) -> DevelopmentalState {
        let d = dims();
        DevelopmentalState::new(0, d.keys().map(|k| (k.to_string(), v)).collect(), &d).unwrap()
    }

    fn behavior() -> BehaviorRecord {
        BehaviorRecord {
            agent_id: "a".into(),
            timepoint: 1,
            utterances: vec![],
            pass: true,
            metadata: BTreeMap::new(),
        }
    }

    fn concept_json(values: [f64; 5]) -> String {
        format!(
            "```json\n{{\"reflection\": \"ok\", \"status\": {{\"motivation\": {}, \"academic_self_efficacy\": {}, \"grit\": {}, \"self_regulated_learning\": {}, \"technology_acceptance\": {}}}}}\n```",
            values[0], values[1], values[2], values[3], values[4]
        )
    }

    fn run(mode: ReportMode, backend: &dyn Generator) -> Result<ReportOutcome> {
        let d = dims();
        let templates = TemplateSet::builtin();
        let settings = ReportSettings {
            system_prompt: "system",
            lesson: "lesson",
            dims: &d,
            templates: &templates,
            temperature: 0.7,
            max_tokens: 256,
            seed: 11,
        };
        predict_development(&state(50.0), &behavior(), mode, backend, &settings)
    }

    #[test]
    fn echoing_current_values_is_a_fixed_point() {
        let backend = MockBackend::with_rules(vec![CannedRule::for_kind(
            ShapeKind::ConceptReport,
            concept_json([50.0; 5]),
        )]);
        let out = run(ReportMode::Concept, &backend).unwrap();
        assert_eq!(out.state.scores(), state(50.0).scores());
        assert_eq!(out.state.timepoint(), 1);
        assert_eq!(out.exchanges[0].reflection, "ok");
    }

    #[test]
    fn out_of_range_is_rejected() {
        let backend = MockBackend::with_rules(vec![CannedRule::for_kind(
            ShapeKind::ConceptReport,
            concept_json([105.0, 50.0, 50.0, 50.0, 50.0]),
        )]);
        match run(ReportMode::Concept, &backend) {
            Err(CoreError::OutOfRange { dimension, value, .. }) => {
                assert_eq!(dimension, "motivation");
                assert_eq!(value, 105.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn items_one_three_five_score_fifty() {
        let d = dims();
        let grit = d.get("grit").unwrap();
        let parsed = parse_scales_report(r#"{"reflection":"r","scale":[1,3,5]}"#, &[grit]).unwrap();
        assert_eq!(parsed.scores["grit"], 50.0);
        let keyed = parse_scales_report(r#"{"scale":{"grit":[1,3,5]}}"#, &[grit]).unwrap();
        assert_eq!(keyed.scores["grit"], 50.0);
    }

    #[test]
    fn scales_reject_wrong_counts_and_out_of_scale_answers() {
        let d = dims();
        let grit = d.get("grit").unwrap();
        assert!(matches!(
            parse_scales_report(r#"{"scale":[1,3]}"#, &[grit]),
            Err(CoreError::UnparsableReport { .. })
        ));
        assert!(matches!(
            parse_scales_report(r#"{"scale":[1,3,6]}"#, &[grit]),
            Err(CoreError::OutOfScale { .. })
        ));
    }

    #[test]
    fn concept_accepts_display_names_and_bare_json() {
        let d = dims();
        let text = r#"Sure! {"reflection":"x","status":{"Motivation":"70","Academic Self-Efficacy":60,"grit":55,"self regulated learning":40,"Technology Acceptance":90}}"#;
        let parsed = parse_concept_report(text, &refs(&d)).unwrap();
        assert_eq!(parsed.scores["motivation"], 70.0);
        assert_eq!(parsed.scores["self_regulated_learning"], 40.0);
    }

    #[test]
    fn synthesized_reports_parse_in_both_modes() {
        let concept = run(ReportMode::Concept, &MockBackend::new()).unwrap();
        assert_eq!(concept.exchanges.len(), 1);
        let scales = run(ReportMode::Scales, &MockBackend::new()).unwrap();
        assert_eq!(scales.exchanges.len(), 5);
        for v in scales.state.scores().values() {
            assert!((0.0..=100.0).contains(v));
        }
    }

    struct GarbageThenGood(std::sync::atomic::AtomicUsize);

    impl Generator for GarbageThenGood {
        fn backend_id(&self) -> String {
            "g".into()
        }

        fn generate(
            &self,
            r: &GenerationRequest,
        ) -> std::result::Result<devsim_llm::GenerationResponse, devsim_llm::LlmError> {
            let n = self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            let mut resp = MockBackend::new().generate(r)?;
            if n == 0 {
                resp.text = "I feel fine.".into();
            }
            Ok(resp)
        }
    }

    #[test]
    fn one_reask_recovers() {
        let backend = GarbageThenGood(Default::default());
        let out = run(ReportMode::Concept, &backend).unwrap();
        assert_eq!(out.exchanges[0].responses.len(), 2);
    }

    #[test]
    fn second_failure_carries_raw_text() {
        let backend = MockBackend::with_rules(vec![CannedRule::for_kind(
            ShapeKind::ConceptReport,
            "no numbers today",
        )]);
        match run(ReportMode::Concept, &backend) {
            Err(CoreError::UnparsableReport { raw, .. }) => assert_eq!(raw, "no numbers today"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fenced_block_wins_over_surrounding_braces() {
        let text = "{note}\n```json\n{\"a\": 1}\n```\n{tail}";
        assert_eq!(extract_json_block(text), Some("{\"a\": 1}"));
    }
}
