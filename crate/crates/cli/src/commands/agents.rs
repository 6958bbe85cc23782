use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use devsim_core::engine::derive_seed;
use devsim_core::files::{write_json, write_jsonl};
use devsim_core::{stratified_sample, StudentProfile};

use super::{create_dir, profiles};
use crate::error::{CliError, Result};
use crate::Global;

pub const COHORT_FILE: &str = "cohort.jsonl";
pub const STRATA_FILE: &str = "strata.json";

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Profiles file (JSON lines).
    #[arg(long)]
    pub population: PathBuf,
    /// Stratification keys: score, trait, attribute or endowment names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub strata: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub per_stratum: usize,
}

pub fn sample(global: &Global, args: &SampleArgs) -> Result<()> {
    let population = profiles(&args.population)?;
    let seed = derive_seed(global.seed(), 0, "sampling");
    let picked = stratified_sample(&population, &args.strata, args.per_stratum, seed)?;
    let by_id: BTreeMap<&str, &StudentProfile> = population.iter().map(|p| (p.agent_id.as_str(), p)).collect();
    let cohort: Vec<&StudentProfile> = picked.iter().map(|s| by_id[s.agent_id.as_str()]).collect();
    let strata: BTreeMap<&str, &str> = picked.iter().map(|s| (s.agent_id.as_str(), s.stratum.as_str())).collect();
    match &global.overrides.out {
        Some(out) => {
            create_dir(out)?;
            write_jsonl(&out.join(COHORT_FILE), &cohort)?;
            write_json(&out.join(STRATA_FILE), &strata)?;
            println!(
                "sampled {} of {} agents -> {}",
                cohort.len(),
                population.len(),
                out.join(COHORT_FILE).display()
            );
        }
        None => {
            for s in &picked {
                println!("{}\t{}", s.agent_id, s.stratum);
            }
        }
    }
    if cohort.is_empty() {
        return Err(CliError::usage("the sample is empty"));
    }
    Ok(())
}
