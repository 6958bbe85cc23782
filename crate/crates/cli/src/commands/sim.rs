use std::collections::BTreeMap;

use clap::Args;
use devsim_core::engine::{run_in_dir, AgentFailure, RunDir, Services};
use devsim_core::files::write_json;
use devsim_core::knowledge::RetrievalMethod;
use serde::{Deserialize, Serialize};

use super::{backends, file_hash, simulation, write_text};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::Global;

pub const MANIFEST_FILE: &str = "manifest.json";
/// The resolved configuration; `sim run --config` on it repeats the run.
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Continue after the last complete period in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Override `simulation.periods`.
    #[arg(long)]
    pub periods: Option<u32>,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub seed: u64,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedder: Option<String>,
    pub config_hash: String,
    pub template_set: String,
    pub template_hashes: BTreeMap<String, String>,
    /// Content hashes of every input file.
    pub inputs: BTreeMap<String, String>,
    pub agents: usize,
    pub completed_periods: u32,
    pub failures: Vec<AgentFailure>,
    pub config: RunConfig,
}

fn input_hashes(config: &RunConfig) -> Result<BTreeMap<String, String>> {
    let p = &config.paths;
    let mut out = BTreeMap::new();
    let files = [
        ("profiles", Some(&p.profiles)),
        ("environment", Some(&p.environment)),
        ("actions", Some(&p.actions)),
        ("script", Some(&p.script)),
        ("findings", Some(&p.findings)),
        ("findings_embeddings", p.findings_embeddings.as_ref()),
        ("taxonomy", p.taxonomy.as_ref()),
        ("dimensions", p.dimensions.as_ref()),
        ("mock_rules", p.mock_rules.as_ref()),
    ];
    for (name, path) in files {
        if let Some(path) = path {
            out.insert(name.to_string(), file_hash(path)?);
        }
    }
    Ok(out)
}

pub fn run(global: &Global, args: &RunArgs) -> Result<()> {
    let mut config = global.run_config()?;
    if let Some(periods) = args.periods {
        config.simulation.periods = periods;
    }
    let out = config.out_dir()?.to_path_buf();
    let (run, store) = simulation(&config)?;
    let b = backends(&config.backend, config.paths.mock_rules.as_deref())?;
    let needs_embedder = run.config.retrieval == RetrievalMethod::Embedding && store.embeddings().is_none();
    let services = Services {
        backend: b.generator.as_ref(),
        embedder: needs_embedder.then_some(b.embedder.as_ref()),
        findings: &store,
    };
    let outcome = run_in_dir(&run, &services, &out, args.resume)?;
    let manifest = Manifest {
        run_id: run.config.run_id.clone(),
        seed: run.config.seed,
        backend: b.generator.backend_id(),
        embedder: needs_embedder.then(|| b.embedder.embedder_id()),
        config_hash: run.config.hash(),
        template_set: run.scenario.templates.id.clone(),
        template_hashes: run
            .scenario
            .templates
            .hashes()
            .into_iter()
            .map(|(role, hash)| (role.file_name().trim_end_matches(".txt").to_string(), hash))
            .collect(),
        inputs: input_hashes(&config)?,
        agents: run.agents.len(),
        completed_periods: outcome.completed_periods,
        failures: outcome.failures.clone(),
        config,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    let replay = toml::to_string(&manifest.config).map_err(|e| CliError::usage(format!("serializing config: {e}")))?;
    write_text(&out.join(CONFIG_FILE), &replay)?;
    let dir = RunDir::new(&out);
    println!(
        "run `{}`: {} agent(s), {} period(s) -> {}",
        manifest.run_id,
        manifest.agents,
        manifest.completed_periods,
        dir.transcript().display()
    );
    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("agent {} failed at period {}: {}", f.agent_id, f.t, f.error);
        }
        return Err(CliError::AgentsFailed {
            failed: outcome.failures.len(),
            agents: manifest.agents,
            out: out.display().to_string(),
            backend: outcome.failures.iter().any(|f| f.backend),
        });
    }
    Ok(())
}
