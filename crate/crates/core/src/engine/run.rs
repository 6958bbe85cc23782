use std::collections::{BTreeMap, BTreeSet};

use devsim_llm::{stable_hash, Embedder, Generator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::behavior::{simulate_behavior, BehaviorSettings};
use super::history::{update_history, History, DEFAULT_TOKEN_BUDGET};
use super::report::{predict_development, ReportSettings};
use super::script::EnvironmentScript;
use super::transcript::{EventKind, TranscriptEvent, TranscriptSink};
use super::derive_seed;
use crate::domain::{
    validate_profile, ActionSpec, AgentState, DevelopmentalState, DimensionSet, EnvironmentSpec,
    StudentProfile,
};
use crate::knowledge::{format_findings, retrieve_for_agent, AgentContext, FindingsStore, RetrievalMethod, DEFAULT_TOP_K};
use crate::promptkit::{build_system_prompt, PromptContext, ReportMode, TemplateRole, TemplateSet};
use crate::taxonomy::Taxonomy;
use crate::{CoreError, Result};

type Stepped = (AgentState, Vec<TranscriptEvent>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub run_id: String,
    pub seed: u64,
    pub periods: u32,
    pub mode: ReportMode,
    pub retrieval: RetrievalMethod,
    pub top_k: usize,
    pub token_budget: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_parallel: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            seed: 0,
            periods: 1,
            mode: ReportMode::Concept,
            retrieval: RetrievalMethod::Keywords,
            top_k: DEFAULT_TOP_K,
            token_budget: DEFAULT_TOKEN_BUDGET,
            temperature: 0.7,
            max_tokens: 1024,
            max_parallel: 4,
        }
    }
}

impl SimulationConfig {
    /// Identity of a run for resuming: every field except the period count,
    /// so a finished run can be extended.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.periods = 0;
        stable_hash(&[&serde_json::to_string(&c).expect("config serializes")])
    }
}

/// Everything shared by all agents of a run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub env: EnvironmentSpec,
    pub actions: ActionSpec,
    pub script: EnvironmentScript,
    pub dims: DimensionSet,
    pub taxonomy: Taxonomy,
    pub templates: TemplateSet,
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub config: SimulationConfig,
    pub scenario: Scenario,
    /// Sorted by agent id.
    pub agents: Vec<AgentState>,
}

/// Per-agent stream seed derived from the run seed.
pub fn agent_seed(run_seed: u64, agent_id: &str) -> u64 {
    derive_seed(run_seed, 0, &format!("agent:{agent_id}"))
}

impl SimulationRun {
    /// Starts every profile at its initial scores with an empty history.
    pub fn new(config: SimulationConfig, scenario: Scenario, profiles: Vec<StudentProfile>) -> Result<Self> {
        let mut agents = profiles
            .into_iter()
            .map(|p| {
                Ok(AgentState {
                    dev: p.initial_state(&scenario.dims)?,
                    history: History::new(config.token_budget),
                    rng_seed: agent_seed(config.seed, &p.agent_id),
                    profile: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        agents.sort_by(|a, b| a.profile.agent_id.cmp(&b.profile.agent_id));
        let run = Self {
            config,
            scenario,
            agents,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        if c.run_id.trim().is_empty() {
            return Err(CoreError::invalid("run", "run_id is empty"));
        }
        if c.top_k == 0 || c.token_budget == 0 || c.max_parallel == 0 || c.max_tokens == 0 {
            return Err(CoreError::invalid(
                "run",
                "top_k, token_budget, max_parallel and max_tokens must be at least 1",
            ));
        }
        if !(c.temperature.is_finite() && c.temperature >= 0.0) {
            return Err(CoreError::invalid("run", format!("temperature {} is invalid", c.temperature)));
        }
        let s = &self.scenario;
        s.env.validate(&s.taxonomy)?;
        s.actions.validate()?;
        s.script.validate()?;
        s.templates.validate(&s.dims)?;
        if c.mode == ReportMode::Scales {
            if let Some(d) = s.dims.dimensions().iter().find(|d| d.items.is_empty()) {
                return Err(CoreError::invalid(
                    "run",
                    format!("scales mode needs items for `{}`", d.key),
                ));
            }
        }
        if self.agents.is_empty() {
            return Err(CoreError::Empty("agent cohort"));
        }
        let mut ids = BTreeSet::new();
        for a in &self.agents {
            if !ids.insert(a.agent_id()) {
                return Err(CoreError::invalid("run", format!("duplicate agent id `{}`", a.agent_id())));
            }
            if let Some(v) = validate_profile(&a.profile, &s.taxonomy, &s.dims).first() {
                return Err(CoreError::invalid(
                    "profile",
                    format!("`{}`: {} {}", a.agent_id(), v.field, v.rule),
                ));
            }
        }
        Ok(())
    }
}

pub struct Services<'a> {
    pub backend: &'a dyn Generator,
    pub embedder: Option<&'a dyn Embedder>,
    pub findings: &'a FindingsStore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentFailure {
    pub agent_id: String,
    pub t: u32,
    pub error: String,
    pub backend: bool,
}

/// Run state after a whole number of periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub run_id: String,
    pub config_hash: String,
    pub completed_periods: u32,
    pub agents: Vec<AgentState>,
    pub failures: Vec<AgentFailure>,
}

impl Checkpoint {
    pub fn initial(run: &SimulationRun) -> Self {
        Self {
            run_id: run.config.run_id.clone(),
            config_hash: run.config.hash(),
            completed_periods: 0,
            agents: run.agents.clone(),
            failures: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub agents: Vec<AgentState>,
    pub failures: Vec<AgentFailure>,
    pub completed_periods: u32,
}

impl RunOutcome {
    pub fn final_states(&self) -> BTreeMap<String, DevelopmentalState> {
        self.agents
            .iter()
            .map(|a| (a.agent_id().to_string(), a.dev.clone()))
            .collect()
    }
}

/// The system prompt an agent sees in period `dev.timepoint()`.
pub fn system_prompt_for(
    scenario: &Scenario,
    profile: &StudentProfile,
    dev: &DevelopmentalState,
    findings_block: &str,
    history_block: &str,
) -> Result<String> {
    let ctx = PromptContext {
        env: &scenario.env,
        profile,
        dev,
        dims: &scenario.dims,
        taxonomy: &scenario.taxonomy,
        actions: &scenario.actions,
        findings_block,
        history_block,
    };
    build_system_prompt(&ctx, scenario.templates.get(TemplateRole::System))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("engine values serialize")
}

/// One period for one agent: findings, behavior, report, history.
pub fn step_agent(
    run: &SimulationRun,
    services: &Services<'_>,
    agent: &AgentState,
) -> Result<(AgentState, Vec<TranscriptEvent>)> {
    let s = &run.scenario;
    let c = &run.config;
    let t = agent.dev.timepoint();
    let findings = retrieve_for_agent(
        c.retrieval,
        services.findings,
        c.top_k,
        services.embedder,
        AgentContext {
            env: &s.env,
            profile: &agent.profile,
            dev: &agent.dev,
            dims: &s.dims,
            taxonomy: &s.taxonomy,
        },
    )?;
    let findings_block = format_findings(&findings);
    let history_block = agent.history.render();
    let system_prompt = system_prompt_for(s, &agent.profile, &agent.dev, &findings_block, &history_block)?;
    let system_prompt_hash = stable_hash(&[&system_prompt]);
    let module = s.script.module_for(t);
    let behavior = simulate_behavior(
        agent,
        module,
        &system_prompt,
        s.templates.get(TemplateRole::Behavior),
        services.backend,
        &BehaviorSettings {
            temperature: c.temperature,
            max_tokens: c.max_tokens,
        },
    )?;
    let report = predict_development(
        &agent.dev,
        &behavior.record,
        c.mode,
        services.backend,
        &ReportSettings {
            system_prompt: &system_prompt,
            lesson: &behavior.lesson,
            dims: &s.dims,
            templates: &s.templates,
            temperature: c.temperature,
            max_tokens: c.max_tokens,
            seed: derive_seed(agent.rng_seed, t, "report"),
        },
    )?;
    let (history, compression) = update_history(
        &agent.history,
        behavior.record.clone(),
        report.state.clone(),
        services.backend,
        s.templates.get(TemplateRole::Summary),
        derive_seed(agent.rng_seed, t, "summary"),
    )?;

    let event = |kind, payload, prompt_hash: String| TranscriptEvent {
        run_id: c.run_id.clone(),
        agent_id: agent.agent_id().to_string(),
        t,
        kind,
        payload,
        prompt_hash,
    };
    let mut events = vec![
        event(
            EventKind::Behavior,
            json!({
                "record": to_value(&behavior.record),
                "input_state": to_value(&agent.dev),
                "findings": findings.iter().map(|f| f.id.as_str()).collect::<Vec<_>>(),
                "findings_block": findings_block,
                "history_block": history_block,
                "system_prompt_hash": system_prompt_hash,
                "module": module.id,
                "slides": to_value(&behavior.slides),
            }),
            system_prompt_hash.clone(),
        ),
        event(
            EventKind::Report,
            json!({
                "mode": c.mode,
                "state": to_value(&report.state),
                "exchanges": to_value(&report.exchanges),
            }),
            stable_hash(
                &report
                    .exchanges
                    .iter()
                    .map(|e| e.prompt_hash.as_str())
                    .collect::<Vec<_>>(),
            ),
        ),
    ];
    if let Some(step) = compression {
        let hash = stable_hash(&step.prompt_hashes.iter().map(String::as_str).collect::<Vec<_>>());
        events.push(event(EventKind::Compression, to_value(&step), hash));
    }
    let next = AgentState {
        profile: agent.profile.clone(),
        dev: report.state,
        history,
        rng_seed: agent.rng_seed,
    };
    Ok((next, events))
}

fn prepared_store(run: &SimulationRun, services: &Services<'_>) -> Result<Option<FindingsStore>> {
    if run.config.retrieval != RetrievalMethod::Embedding || services.findings.embeddings().is_some() {
        return Ok(None);
    }
    let embedder = services
        .embedder
        .ok_or_else(|| CoreError::invalid("retrieval", "embedding retrieval needs an embedder"))?;
    Ok(Some(services.findings.clone().embed_with(embedder)?))
}

/// Runs from `start` to the configured period count. After each period the
/// events are appended to `sink` in agent order and `on_period` receives
/// the new checkpoint.
pub fn run_from(
    run: &SimulationRun,
    services: &Services<'_>,
    sink: &dyn TranscriptSink,
    start: Checkpoint,
    on_period: &mut dyn FnMut(&Checkpoint) -> Result<()>,
) -> Result<RunOutcome> {
    run.validate()?;
    if start.config_hash != run.config.hash() {
        return Err(CoreError::invalid("resume", "checkpoint was written by a different configuration"));
    }
    let embedded = prepared_store(run, services)?;
    let services = Services {
        backend: services.backend,
        embedder: services.embedder,
        findings: embedded.as_ref().unwrap_or(services.findings),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.config.max_parallel)
        .build()
        .map_err(|e| CoreError::invalid("thread pool", e.to_string()))?;
    let mut state = start;
    while state.completed_periods < run.config.periods {
        let t = state.completed_periods;
        let failed: BTreeSet<String> = state.failures.iter().map(|f| f.agent_id.clone()).collect();
        let results: Vec<Option<Result<Stepped>>> = pool.install(|| {
            state
                .agents
                .par_iter()
                .map(|a| (!failed.contains(a.agent_id())).then(|| step_agent(run, &services, a)))
                .collect()
        });
        let mut events = Vec::new();
        for (agent, result) in state.agents.iter_mut().zip(results) {
            match result {
                None => {}
                Some(Ok((next, evs))) => {
                    *agent = next;
                    events.extend(evs);
                }
                Some(Err(e)) => {
                    log::warn!("agent {} failed in period {t}: {e}", agent.agent_id());
                    state.failures.push(AgentFailure {
                        agent_id: agent.agent_id().to_string(),
                        t,
                        error: e.to_string(),
                        backend: e.is_backend(),
                    });
                }
            }
        }
        sink.append(&events)?;
        state.completed_periods += 1;
        on_period(&state)?;
    }
    Ok(RunOutcome {
        agents: state.agents,
        failures: state.failures,
        completed_periods: state.completed_periods,
    })
}

pub fn run(run: &SimulationRun, services: &Services<'_>, sink: &dyn TranscriptSink) -> Result<RunOutcome> {
    run_from(run, services, sink, Checkpoint::initial(run), &mut |_| Ok(()))
}
