use std::collections::BTreeMap;

use devsim_llm::{stable_hash, GenerationRequest, Generator, ResponseShape};
use serde::{Deserialize, Serialize};

use super::script::{render_message, Module};
use super::derive_seed;
use crate::domain::{AgentState, BehaviorRecord, SpeakerRole, Utterance};
use crate::promptkit::{build_behavior_prompt, PromptTemplate};
use crate::Result;

/// The agent's turn on one slide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideExchange {
    pub slide_id: String,
    pub prompt_hash: String,
    pub response: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorOutcome {
    pub record: BehaviorRecord,
    pub slides: Vec<SlideExchange>,
    /// The whole lesson as the agent saw it, for the report prompt.
    pub lesson: String,
}

/// True for a response that only asks to move on.
pub fn is_continue(text: &str) -> bool {
    let t = text
        .trim()
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace() || "“”「」。".contains(c));
    t.eq_ignore_ascii_case("continue") || t == "继续"
}

pub struct BehaviorSettings {
    pub temperature: f64,
    pub max_tokens: u32,
}

/// B_{t+1}: one generation per slide of `module`, all under the same system
/// prompt. Later slides see the chat of earlier ones. The record holds the
/// agent's own utterances and is flagged `pass` when every answer was
/// "continue".
pub fn simulate_behavior(
    agent: &AgentState,
    module: &Module,
    system_prompt: &str,
    template: &PromptTemplate,
    backend: &dyn Generator,
    settings: &BehaviorSettings,
) -> Result<BehaviorOutcome> {
    let t = agent.dev.timepoint();
    let mut chat: Vec<String> = Vec::new();
    let mut lesson: Vec<String> = Vec::new();
    let mut utterances = Vec::new();
    let mut slides = Vec::new();
    for (i, slide) in module.slides.iter().enumerate() {
        let scripted: Vec<String> = slide.messages.iter().map(render_message).collect();
        chat.extend(scripted.iter().cloned());
        let prompt = build_behavior_prompt(&slide.content, &chat.join("\n"), template)?;
        let seed = derive_seed(agent.rng_seed, t, &format!("slide-{i}"));
        let request = GenerationRequest::new(system_prompt, prompt.clone())
            .with_seed(seed)
            .with_temperature(settings.temperature)
            .with_max_tokens(settings.max_tokens)
            .with_shape(ResponseShape::Text);
        let response = backend.generate(&request)?;
        let text = response.text.trim().to_string();
        let passed = is_continue(&text);
        lesson.push(format!("Slide {}: {}", slide.id, slide.content.trim()));
        lesson.extend(scripted);
        if passed {
            lesson.push("You: (continue)".into());
        } else {
            chat.push(format!("You: {text}"));
            lesson.push(format!("You: {text}"));
            utterances.push(Utterance {
                role: SpeakerRole::Student,
                text: text.clone(),
            });
        }
        slides.push(SlideExchange {
            slide_id: slide.id.clone(),
            prompt_hash: stable_hash(&[system_prompt, &prompt]),
            response: text,
            passed,
        });
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("module".to_string(), module.id.clone());
    metadata.insert(
        "slides".to_string(),
        module.slides.iter().map(|s| s.id.as_str()).collect::<Vec<_>>().join(","),
    );
    let record = BehaviorRecord {
        agent_id: agent.profile.agent_id.clone(),
        timepoint: t + 1,
        pass: utterances.is_empty(),
        utterances,
        metadata,
    };
    Ok(BehaviorOutcome {
        record,
        slides,
        lesson: lesson.join("\n"),
    })
}
