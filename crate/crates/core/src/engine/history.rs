use std::fmt::Write as _;

use devsim_llm::{estimate_tokens, GenerationRequest, Generator, ResponseShape};
use serde::{Deserialize, Serialize};

use crate::domain::{BehaviorRecord, DevelopmentalState, SpeakerRole};
use crate::promptkit::{
    build_summary_prompt, render_score, PromptTemplate, TemplateRole, SUMMARY_SYSTEM_PROMPT,
};
use crate::{CoreError, Result};

pub const DEFAULT_TOKEN_BUDGET: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub behavior: BehaviorRecord,
    pub state: DevelopmentalState,
}

/// H_t: a compressed prefix plus the most recent raw periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub summary: String,
    pub recent: Vec<HistoryEntry>,
    pub token_budget: usize,
}

/// What one update did to keep the history inside its budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionStep {
    /// Behavior timepoints folded into the summary, or dropped when
    /// `fallback` is set.
    pub folded: Vec<u32>,
    pub fallback: bool,
    pub summary_truncated: bool,
    pub utterances_trimmed: usize,
    pub prompt_hashes: Vec<String>,
    pub summary: String,
    pub rendered_tokens: usize,
}

fn speaker(role: SpeakerRole) -> &'static str {
    match role {
        SpeakerRole::Student => "You",
        SpeakerRole::Teacher => "Teacher",
        SpeakerRole::Peer => "Classmate",
    }
}

pub fn render_entry(entry: &HistoryEntry) -> String {
    let mut out = format!("## Period {}\n", entry.behavior.timepoint);
    if entry.behavior.utterances.is_empty() {
        out.push_str("(you only listened)\n");
    }
    for u in &entry.behavior.utterances {
        let _ = writeln!(out, "{}: {}", speaker(u.role), u.text.trim());
    }
    let status: Vec<String> = entry
        .state
        .scores()
        .iter()
        .map(|(k, v)| format!("{k} {}", render_score(*v)))
        .collect();
    let _ = write!(out, "Status afterwards: {}", status.join(", "));
    out
}

impl History {
    pub fn new(token_budget: usize) -> Self {
        Self {
            summary: String::new(),
            recent: Vec::new(),
            token_budget,
        }
    }

    /// Text placed in the system prompt; empty when nothing happened yet.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if !self.summary.is_empty() {
            parts.push(format!("## Earlier Periods\n{}", self.summary.trim()));
        }
        parts.extend(self.recent.iter().map(render_entry));
        parts.join("\n\n")
    }

    pub fn tokens(&self) -> usize {
        estimate_tokens(&self.render())
    }

    fn over_budget(&self) -> bool {
        self.tokens() > self.token_budget
    }

    fn truncate_summary(&mut self) -> bool {
        let mut changed = false;
        while self.over_budget() && !self.summary.is_empty() {
            let excess = self.tokens() - self.token_budget;
            let drop = (excess * 4).max(1);
            let chars: Vec<char> = self.summary.chars().collect();
            self.summary = if drop >= chars.len() {
                String::new()
            } else {
                chars[drop..].iter().collect::<String>().trim_start().to_string()
            };
            changed = true;
        }
        changed
    }

    fn trim_latest(&mut self) -> usize {
        let mut trimmed = 0;
        while self.over_budget() {
            let latest = self.recent.last_mut().expect("latest pair kept");
            if latest.behavior.utterances.is_empty() {
                break;
            }
            latest.behavior.utterances.remove(0);
            trimmed += 1;
        }
        if trimmed > 0 {
            let latest = self.recent.last_mut().expect("latest pair kept");
            latest
                .behavior
                .metadata
                .insert("history_trimmed_utterances".into(), trimmed.to_string());
        }
        trimmed
    }
}

/// Appends the newest period and compresses until the rendered history fits
/// the budget.
///
/// Oldest raw periods are folded into the summary one at a time through the
/// summarizer. If the summarizer fails the period is dropped instead. When
/// only the latest period is left, the summary is shortened from its start,
/// then the oldest utterances of the latest period are cut. A budget that
/// cannot hold the latest status line is an error.
pub fn update_history(
    history: &History,
    behavior: BehaviorRecord,
    new_state: DevelopmentalState,
    backend: &dyn Generator,
    template: &PromptTemplate,
    seed: u64,
) -> Result<(History, Option<CompressionStep>)> {
    let mut h = history.clone();
    h.recent.push(HistoryEntry {
        behavior,
        state: new_state,
    });
    if !h.over_budget() {
        return Ok((h, None));
    }
    let mut step = CompressionStep {
        folded: Vec::new(),
        fallback: false,
        summary_truncated: false,
        utterances_trimmed: 0,
        prompt_hashes: Vec::new(),
        summary: String::new(),
        rendered_tokens: 0,
    };
    while h.over_budget() && h.recent.len() > 1 {
        let oldest = h.recent.remove(0);
        step.folded.push(oldest.behavior.timepoint);
        let prompt = build_summary_prompt(&h.summary, &render_entry(&oldest), template)?;
        step.prompt_hashes
            .push(devsim_llm::stable_hash(&[SUMMARY_SYSTEM_PROMPT, &prompt]));
        let request = GenerationRequest::new(SUMMARY_SYSTEM_PROMPT, prompt)
            .with_seed(seed.wrapping_add(step.folded.len() as u64))
            .with_temperature(0.0)
            .with_shape(ResponseShape::Summary);
        match backend.generate(&request) {
            Ok(resp) if !resp.text.trim().is_empty() => h.summary = resp.text.trim().to_string(),
            Ok(_) => {
                log::warn!("summarizer returned nothing; dropping period {}", oldest.behavior.timepoint);
                step.fallback = true;
            }
            Err(e) => {
                log::warn!(
                    "summarizer failed ({e}); dropping period {}",
                    oldest.behavior.timepoint
                );
                step.fallback = true;
            }
        }
    }
    step.summary_truncated = h.truncate_summary();
    step.utterances_trimmed = h.trim_latest();
    if h.over_budget() {
        return Err(CoreError::BudgetTooSmall {
            budget: h.token_budget,
            needed: h.tokens(),
        });
    }
    step.summary = h.summary.clone();
    step.rendered_tokens = h.tokens();
    Ok((h, Some(step)))
}

/// The prompt template used by [`update_history`] when none is configured.
pub fn default_summary_template() -> PromptTemplate {
    PromptTemplate::builtin(TemplateRole::Summary)
}
