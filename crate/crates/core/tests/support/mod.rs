#![allow(dead_code)]

use std::path::PathBuf;

use devsim_core::engine::{EnvironmentScript, Scenario, SimulationConfig, SimulationRun};
use devsim_core::files::{read_json, read_jsonl};
use devsim_core::knowledge::FindingsStore;
use devsim_core::promptkit::{ReportMode, TemplateSet};
use devsim_core::{ActionSpec, DimensionSet, EnvironmentSpec, StudentProfile, Taxonomy};
use devsim_llm::MockBackend;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(rel)
}

pub fn scenario() -> Scenario {
    Scenario {
        env: read_json::<EnvironmentSpec>(&fixture("demo/environment.json")).unwrap(),
        actions: read_json::<ActionSpec>(&fixture("demo/actions.json")).unwrap(),
        script: EnvironmentScript::load(&fixture("demo/script.json")).unwrap(),
        dims: DimensionSet::case_study(),
        taxonomy: Taxonomy::default_taxonomy(),
        templates: TemplateSet::builtin(),
    }
}

pub fn cohort(n: usize) -> Vec<StudentProfile> {
    let mut all: Vec<StudentProfile> = read_jsonl(&fixture("demo/population.jsonl")).unwrap();
    all.truncate(n);
    all
}

pub fn findings() -> FindingsStore {
    FindingsStore::load(&fixture("demo/findings.jsonl"), Some(&DimensionSet::case_study())).unwrap()
}

pub fn config(run_id: &str, periods: u32, mode: ReportMode) -> SimulationConfig {
    SimulationConfig {
        run_id: run_id.into(),
        seed: 42,
        periods,
        mode,
        ..SimulationConfig::default()
    }
}

pub fn simulation(run_id: &str, agents: usize, periods: u32, mode: ReportMode) -> SimulationRun {
    SimulationRun::new(config(run_id, periods, mode), scenario(), cohort(agents)).unwrap()
}

pub fn canned_backend() -> MockBackend {
    MockBackend::from_fixture_file(&fixture("golden/mock_rules.json")).unwrap()
}

/// Compares `actual` with a golden file, rewriting it when DEVSIM_BLESS is set.
pub fn assert_golden(rel: &str, actual: &str) {
    let path = fixture(rel);
    if std::env::var_os("DEVSIM_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with DEVSIM_BLESS=1 to create)", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}
