//! The iterative simulation: each period an agent reads its findings and
//! history, behaves through one scripted module, reports its new
//! developmental state, and folds the period into its history.

mod behavior;
mod history;
mod persist;
mod report;
mod run;
mod script;
mod transcript;

pub use behavior::{is_continue, simulate_behavior, BehaviorOutcome, BehaviorSettings, SlideExchange};
pub use history::{
    default_summary_template, render_entry, update_history, CompressionStep, History, HistoryEntry,
    DEFAULT_TOKEN_BUDGET,
};
pub use persist::{
    read_final_states, run_in_dir, RunDir, CHECKPOINTS_FILE, EVENTS_FILE, FINAL_STATES_FILE,
    TRANSCRIPT_FILE,
};
pub use report::{
    extract_json_block, parse_concept_report, parse_scales_report, predict_development, ParsedReport,
    ReportExchange, ReportOutcome, ReportSettings,
};
pub use run::{
    agent_seed, run, run_from, step_agent, system_prompt_for, AgentFailure, Checkpoint, RunOutcome,
    Scenario, Services, SimulationConfig, SimulationRun,
};
pub use script::{render_message, EnvironmentScript, Module, ScriptMessage, Slide};
pub use transcript::{
    merge_by_agent, read_transcript, write_transcript, EventKind, JsonlSink, MemorySink,
    TranscriptEvent, TranscriptSink,
};

/// Seed for one named draw of an agent in period `t`.
pub fn derive_seed(base: u64, t: u32, label: &str) -> u64 {
    let hex = devsim_llm::stable_hash(&[&base.to_string(), &t.to_string(), label]);
    u64::from_str_radix(&hex[..16], 16).expect("hash is hex")
}
