//! `devsim`: build taxonomies, sample cohorts, retrieve findings, run
//! simulations and score them.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{BackendKind, Overrides, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "devsim", version, about = "Simulate student development with language-model agents")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or evaluate a taxonomy.
    #[command(subcommand)]
    Taxonomy(TaxonomyCommand),
    /// Draw agents from a population.
    #[command(subcommand)]
    Agents(AgentsCommand),
    /// Inspect findings retrieval.
    #[command(subcommand)]
    Findings(FindingsCommand),
    /// Run simulations.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Score predictions.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Subcommand)]
pub enum TaxonomyCommand {
    /// Extract, classify and cluster terms from a corpus of abstracts.
    Build(commands::taxonomy::BuildArgs),
    /// Agreement between two experts' card sorts and the clustering.
    Evaluate(commands::taxonomy::EvaluateArgs),
}

#[derive(Debug, Subcommand)]
pub enum AgentsCommand {
    /// Stratified sample of a profile population.
    Sample(commands::agents::SampleArgs),
}

#[derive(Debug, Subcommand)]
pub enum FindingsCommand {
    /// Show the findings each agent would receive.
    Retrieve(commands::findings::RetrieveArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Run (or resume) the configured simulation.
    Run(commands::sim::RunArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// RMSE, MAE and paired tests per dimension and method.
    Metrics(commands::eval::MetricsArgs),
}

#[derive(Debug, Clone)]
pub struct Global {
    pub config: Option<PathBuf>,
    pub overrides: Overrides,
}

impl Global {
    /// The run configuration with command-line overrides applied.
    pub fn run_config(&self) -> Result<RunConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| CliError::usage("this command needs --config"))?;
        let mut config = RunConfig::load(path)?;
        config.apply(&self.overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn seed(&self) -> u64 {
        self.overrides.seed.unwrap_or_default()
    }

    pub fn backend(&self) -> BackendKind {
        self.overrides.backend.unwrap_or_default()
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let global = Global {
        config: cli.config,
        overrides: Overrides {
            seed: cli.seed,
            backend: cli.backend,
            out: cli.out,
        },
    };
    match cli.command {
        Command::Taxonomy(TaxonomyCommand::Build(args)) => commands::taxonomy::build(&global, &args),
        Command::Taxonomy(TaxonomyCommand::Evaluate(args)) => commands::taxonomy::evaluate(&global, &args),
        Command::Agents(AgentsCommand::Sample(args)) => commands::agents::sample(&global, &args),
        Command::Findings(FindingsCommand::Retrieve(args)) => commands::findings::retrieve(&global, &args),
        Command::Sim(SimCommand::Run(args)) => commands::sim::run(&global, &args),
        Command::Eval(EvalCommand::Metrics(args)) => commands::eval::metrics(&global, &args),
    }
}
