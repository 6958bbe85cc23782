//! The TOML run configuration shared by `sim run` and `findings retrieve`.
//!
//! ```toml
//! seed = 42
//!
//! [paths]
//! profiles = "cohort.jsonl"
//! environment = "environment.json"
//! actions = "actions.json"
//! script = "script.json"
//! findings = "findings.jsonl"
//! out = "runs/demo"
//!
//! [backend]
//! kind = "mock"
//!
//! [simulation]
//! run_id = "demo"
//! periods = 3
//! mode = "concept"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use devsim_core::engine::SimulationConfig;
use devsim_core::knowledge::RetrievalMethod;
use devsim_core::promptkit::ReportMode;
use devsim_llm::HttpConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub profiles: PathBuf,
    pub environment: PathBuf,
    pub actions: PathBuf,
    pub script: PathBuf,
    pub findings: PathBuf,
    /// Vectors keyed by finding id; embedded on the fly when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub findings_embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    /// Canned responses for the mock backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_rules: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    #[serde(flatten)]
    pub http: HttpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub run_id: String,
    pub periods: u32,
    pub mode: ReportMode,
    pub retrieval: RetrievalMethod,
    pub top_k: usize,
    pub token_budget: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Agents simulated concurrently within a period.
    pub max_parallel: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        Self {
            run_id: d.run_id,
            periods: d.periods,
            mode: d.mode,
            retrieval: d.retrieval,
            top_k: d.top_k,
            token_budget: d.token_budget,
            temperature: d.temperature,
            max_tokens: d.max_tokens,
            max_parallel: d.max_parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub paths: Paths,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub simulation: SimulationSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_string(),
            source: Box::new(e),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| devsim_core::CoreError::io(path, e))?;
        let mut config = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = std::path::absolute(base).map_err(|e| devsim_core::CoreError::io(base, e))?;
        config.resolve(&base);
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for path in [&mut p.profiles, &mut p.environment, &mut p.actions, &mut p.script, &mut p.findings] {
            join(path);
        }
        for path in [
            &mut p.findings_embeddings,
            &mut p.taxonomy,
            &mut p.dimensions,
            &mut p.templates,
            &mut p.mock_rules,
            &mut p.out,
        ]
        .into_iter()
        .flatten()
        {
            join(path);
        }
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(kind) = overrides.backend {
            self.backend.kind = kind;
        }
        if let Some(out) = &overrides.out {
            self.paths.out = Some(out.clone());
        }
    }

    /// Every referenced path must exist, and mock runs need a seed.
    pub fn validate(&self) -> Result<()> {
        let p = &self.paths;
        let required = [
            ("profiles", Some(&p.profiles)),
            ("environment", Some(&p.environment)),
            ("actions", Some(&p.actions)),
            ("script", Some(&p.script)),
            ("findings", Some(&p.findings)),
            ("findings_embeddings", p.findings_embeddings.as_ref()),
            ("taxonomy", p.taxonomy.as_ref()),
            ("dimensions", p.dimensions.as_ref()),
            ("templates", p.templates.as_ref()),
            ("mock_rules", p.mock_rules.as_ref()),
        ];
        for (name, path) in required {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(CliError::usage(format!("paths.{name}: {} does not exist", path.display())));
                }
            }
        }
        if self.backend.kind == BackendKind::Mock && self.seed.is_none() {
            return Err(CliError::usage("a seed is required with the mock backend (set `seed` or pass --seed)"));
        }
        if self.simulation.run_id.trim().is_empty() {
            return Err(CliError::usage("simulation.run_id must not be empty"));
        }
        Ok(())
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.paths
            .out
            .as_deref()
            .ok_or_else(|| CliError::usage("no output directory (set paths.out or pass --out)"))
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        let s = &self.simulation;
        SimulationConfig {
            run_id: s.run_id.clone(),
            seed: self.seed.unwrap_or_default(),
            periods: s.periods,
            mode: s.mode,
            retrieval: s.retrieval,
            top_k: s.top_k,
            token_budget: s.token_budget,
            temperature: s.temperature,
            max_tokens: s.max_tokens,
            max_parallel: s.max_parallel,
        }
    }
}
