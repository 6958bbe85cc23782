use std::collections::BTreeMap;

use clap::Args;
use devsim_core::files::write_json;
use devsim_core::knowledge::{format_findings, retrieve_for_agent, AgentContext, RetrievalMethod};

use super::{backends, create_dir, simulation};
use crate::error::{CliError, Result};
use crate::Global;

pub const RETRIEVAL_FILE: &str = "retrieval.json";

#[derive(Debug, Clone, Args)]
pub struct RetrieveArgs {
    /// Only this agent.
    #[arg(long)]
    pub agent: Option<String>,
    /// `keywords` or `embedding`; defaults to the configured method.
    #[arg(long)]
    pub method: Option<RetrievalMethod>,
    #[arg(long)]
    pub k: Option<usize>,
}

pub fn retrieve(global: &Global, args: &RetrieveArgs) -> Result<()> {
    let config = global.run_config()?;
    let (run, store) = simulation(&config)?;
    let method = args.method.unwrap_or(run.config.retrieval);
    let k = args.k.unwrap_or(run.config.top_k);
    let b = backends(&config.backend, config.paths.mock_rules.as_deref())?;
    let embedder = (method == RetrievalMethod::Embedding).then_some(b.embedder.as_ref());
    let store = match embedder {
        Some(e) if store.embeddings().is_none() => store.embed_with(e)?,
        _ => store,
    };
    let agents: Vec<_> = run
        .agents
        .iter()
        .filter(|a| args.agent.as_deref().is_none_or(|id| a.agent_id() == id))
        .collect();
    if agents.is_empty() {
        return Err(CliError::usage(format!(
            "no agent `{}` in {}",
            args.agent.as_deref().unwrap_or_default(),
            config.paths.profiles.display()
        )));
    }
    let s = &run.scenario;
    let mut picked: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for agent in agents {
        let ctx = AgentContext {
            env: &s.env,
            profile: &agent.profile,
            dev: &agent.dev,
            dims: &s.dims,
            taxonomy: &s.taxonomy,
        };
        let found = retrieve_for_agent(method, &store, k, embedder, ctx)?;
        println!("## {}\n{}\n", agent.agent_id(), format_findings(&found));
        picked.insert(agent.agent_id().to_string(), found.iter().map(|f| f.id.clone()).collect());
    }
    if let Some(out) = &global.overrides.out {
        create_dir(out)?;
        write_json(&out.join(RETRIEVAL_FILE), &picked)?;
    }
    Ok(())
}
