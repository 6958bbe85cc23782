pub mod agents;
pub mod eval;
pub mod findings;
pub mod sim;
pub mod taxonomy;

use std::path::Path;
use std::sync::Arc;

use devsim_core::engine::{EnvironmentScript, Scenario, SimulationRun};
use devsim_core::files::{read_json, read_jsonl};
use devsim_core::knowledge::FindingsStore;
use devsim_core::promptkit::TemplateSet;
use devsim_core::taxonomy::read_embeddings;
use devsim_core::{ActionSpec, CoreError, DimensionSet, EnvironmentSpec, StudentProfile, Taxonomy};
use devsim_llm::{Embedder, Generator, HashingEmbedder, HttpBackend, MockBackend};

use crate::config::{BackendConfig, BackendKind, RunConfig};
use crate::error::Result;

pub struct Backends {
    pub generator: Arc<dyn Generator>,
    pub embedder: Arc<dyn Embedder>,
}

/// The mock pairs with the local hashing embedder; the HTTP client serves both.
pub fn backends(config: &BackendConfig, mock_rules: Option<&Path>) -> Result<Backends> {
    Ok(match config.kind {
        BackendKind::Mock => {
            let mock = match mock_rules {
                Some(path) => MockBackend::from_fixture_file(path)?,
                None => MockBackend::new(),
            };
            Backends {
                generator: Arc::new(mock),
                embedder: Arc::new(HashingEmbedder::default()),
            }
        }
        BackendKind::Http => {
            let http = Arc::new(HttpBackend::new(config.http.clone().with_env_key()));
            Backends {
                generator: http.clone(),
                embedder: http,
            }
        }
    })
}

pub fn dimensions(config: &RunConfig) -> Result<DimensionSet> {
    Ok(match &config.paths.dimensions {
        Some(path) => read_json(path)?,
        None => DimensionSet::case_study(),
    })
}

pub fn scenario(config: &RunConfig) -> Result<Scenario> {
    let p = &config.paths;
    Ok(Scenario {
        env: read_json::<EnvironmentSpec>(&p.environment)?,
        actions: read_json::<ActionSpec>(&p.actions)?,
        script: EnvironmentScript::load(&p.script)?,
        dims: dimensions(config)?,
        taxonomy: match &p.taxonomy {
            Some(path) => Taxonomy::load(path)?,
            None => Taxonomy::default_taxonomy(),
        },
        templates: match &p.templates {
            Some(dir) => TemplateSet::load_dir(dir)?,
            None => TemplateSet::builtin(),
        },
    })
}

pub fn profiles(path: &Path) -> Result<Vec<StudentProfile>> {
    let profiles: Vec<StudentProfile> = read_jsonl(path)?;
    if profiles.is_empty() {
        return Err(CoreError::Empty("profiles file").into());
    }
    Ok(profiles)
}

pub fn findings(config: &RunConfig, dims: &DimensionSet) -> Result<FindingsStore> {
    let store = FindingsStore::load(&config.paths.findings, Some(dims))?;
    Ok(match &config.paths.findings_embeddings {
        Some(path) => store.with_embeddings(&read_embeddings(path)?)?,
        None => store,
    })
}

pub fn simulation(config: &RunConfig) -> Result<(SimulationRun, FindingsStore)> {
    let scenario = scenario(config)?;
    let store = findings(config, &scenario.dims)?;
    let run = SimulationRun::new(config.simulation_config(), scenario, profiles(&config.paths.profiles)?)?;
    Ok((run, store))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e).into())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CoreError::io(path, e).into())
}

pub fn file_hash(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    Ok(devsim_llm::stable_hash(&[&text]))
}
