use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use devsim_core::files::{read_json, write_json};
use devsim_core::{DevelopmentalState, DimensionSet};
use devsim_metrics::{
    baseline_mean_predict, evaluate_method, regression_reference, render_comparison_table, robustness_variance,
    Method, MetricKind, MetricReport, PairedSample,
};
use serde::Deserialize;

use super::{create_dir, profiles, write_text};
use crate::error::{CliError, Result};
use crate::Global;

pub const REPORTS_FILE: &str = "metrics.json";
pub const TABLES_FILE: &str = "tables.txt";

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// `METHOD=PATH` with METHOD `concept` or `scales` and PATH a run's
    /// final_states.json (or a plain agent -> scores map). Repeating a
    /// method adds runs for the robustness summary; the first one is scored.
    #[arg(long = "predictions", value_parser = parse_prediction)]
    pub predictions: Vec<(Method, PathBuf)>,
    /// Observed post-test scores: agent -> dimension -> 0..100.
    #[arg(long)]
    pub posttest: PathBuf,
    /// Profiles with the pre-test scores.
    #[arg(long)]
    pub pretest: PathBuf,
    /// Skip the in-sample regression reference.
    #[arg(long)]
    pub no_regression: bool,
    /// Dimension set (JSON); the five case-study dimensions otherwise.
    #[arg(long)]
    pub dimensions: Option<PathBuf>,
}

fn parse_prediction(s: &str) -> std::result::Result<(Method, PathBuf), String> {
    let (method, path) = s.split_once('=').ok_or("expected METHOD=PATH")?;
    let method = match method.trim().to_ascii_lowercase().as_str() {
        "concept" => Method::Concept,
        "scales" => Method::Scales,
        other => return Err(format!("`{other}` is not a simulated method (concept or scales)")),
    };
    Ok((method, PathBuf::from(path)))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScoreFile {
    States(BTreeMap<String, DevelopmentalState>),
    Scores(BTreeMap<String, BTreeMap<String, f64>>),
}

type ScoreTable = BTreeMap<String, BTreeMap<String, f64>>;

pub fn read_scores(path: &Path) -> Result<ScoreTable> {
    Ok(match read_json::<ScoreFile>(path)? {
        ScoreFile::States(states) => states.into_iter().map(|(id, s)| (id, s.scores().clone())).collect(),
        ScoreFile::Scores(scores) => scores,
    })
}

fn column(table: &ScoreTable, agents: &[String], dim: &str, what: &str) -> Result<Vec<f64>> {
    agents
        .iter()
        .map(|a| {
            table
                .get(a)
                .and_then(|s| s.get(dim))
                .copied()
                .ok_or_else(|| CliError::usage(format!("{what} has no `{dim}` value for agent `{a}`")))
        })
        .collect()
}

/// The agent ids every input covers. The first prediction file decides;
/// without predictions, every post-test agent.
fn agent_ids(predictions: &[(Method, ScoreTable)], posttest: &ScoreTable) -> Vec<String> {
    match predictions.first() {
        Some((_, t)) => t.keys().cloned().collect(),
        None => posttest.keys().cloned().collect(),
    }
}

/// One report per method, in table order.
pub fn evaluate(
    dims: &DimensionSet,
    predictions: &[(Method, Vec<ScoreTable>)],
    posttest: &ScoreTable,
    pretest: &ScoreTable,
    regression: bool,
) -> Result<Vec<MetricReport>> {
    let firsts: Vec<(Method, ScoreTable)> = predictions.iter().map(|(m, runs)| (*m, runs[0].clone())).collect();
    let agents = agent_ids(&firsts, posttest);
    if agents.is_empty() {
        return Err(CliError::usage("no agents to evaluate"));
    }
    let keys: Vec<String> = dims.keys().map(str::to_string).collect();
    let truth: Vec<Vec<f64>> = keys
        .iter()
        .map(|d| column(posttest, &agents, d, "posttest"))
        .collect::<Result<_>>()?;
    let pre_by_dim: Vec<Vec<f64>> = keys
        .iter()
        .map(|d| column(pretest, &agents, d, "pretest"))
        .collect::<Result<_>>()?;
    let pre_rows: Vec<Vec<f64>> = (0..agents.len())
        .map(|i| pre_by_dim.iter().map(|c| c[i]).collect())
        .collect();

    let mut reports = Vec::new();
    let mean = baseline_mean_predict(&pre_rows)?;
    let samples = keys
        .iter()
        .enumerate()
        .map(|(j, d)| PairedSample::new(d.clone(), mean.iter().map(|r| r[j]).collect(), truth[j].clone()))
        .collect::<devsim_metrics::Result<Vec<_>>>()?;
    reports.push(evaluate_method(Method::Mean, &samples)?);

    for (method, runs) in predictions {
        let samples = keys
            .iter()
            .enumerate()
            .map(|(j, d)| Ok(PairedSample::new(d.clone(), column(&runs[0], &agents, d, method.label())?, truth[j].clone())?))
            .collect::<Result<Vec<_>>>()?;
        let mut report = evaluate_method(*method, &samples)?;
        if runs.len() > 1 {
            let cube = runs
                .iter()
                .map(|run| {
                    agents
                        .iter()
                        .map(|a| {
                            keys.iter()
                                .map(|d| column(run, std::slice::from_ref(a), d, method.label()).map(|v| v[0]))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            report.robustness = Some(robustness_variance(&cube, &keys)?);
        }
        reports.push(report);
    }

    if regression {
        let samples = keys
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let fit = regression_reference(&pre_rows, &truth[j], &keys)?;
                PairedSample::new(d.clone(), fit.predictions, truth[j].clone())
            })
            .collect::<devsim_metrics::Result<Vec<_>>>()?;
        reports.push(evaluate_method(Method::Regression, &samples)?);
    }
    reports.sort_by_key(|r| r.method);
    Ok(reports)
}

pub fn render_tables(dims: &DimensionSet, reports: &[MetricReport]) -> String {
    let rows: Vec<(String, String)> = dims.dimensions().iter().map(|d| (d.key.clone(), d.name.clone())).collect();
    [MetricKind::Rmse, MetricKind::Mae, MetricKind::TTestP, MetricKind::WilcoxonP]
        .into_iter()
        .map(|k| render_comparison_table(k, &rows, reports))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn metrics(global: &Global, args: &MetricsArgs) -> Result<()> {
    let dims = match &args.dimensions {
        Some(p) => read_json(p)?,
        None => DimensionSet::case_study(),
    };
    let mut grouped: Vec<(Method, Vec<ScoreTable>)> = Vec::new();
    for (method, path) in &args.predictions {
        let table = read_scores(path)?;
        match grouped.iter_mut().find(|(m, _)| m == method) {
            Some((_, runs)) => runs.push(table),
            None => grouped.push((*method, vec![table])),
        }
    }
    let posttest = read_scores(&args.posttest)?;
    let pretest: ScoreTable = profiles(&args.pretest)?
        .into_iter()
        .map(|p| (p.agent_id, p.scores))
        .collect();
    let reports = evaluate(&dims, &grouped, &posttest, &pretest, !args.no_regression)?;
    let tables = render_tables(&dims, &reports);
    print!("{tables}");
    if let Some(out) = &global.overrides.out {
        create_dir(out)?;
        write_json(&out.join(REPORTS_FILE), &reports)?;
        write_text(&out.join(TABLES_FILE), &tables)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 5])]) -> ScoreTable {
        let dims = DimensionSet::case_study();
        rows.iter()
            .map(|(id, v)| (id.to_string(), dims.keys().map(str::to_string).zip(v.iter().copied()).collect()))
            .collect()
    }

    #[test]
    fn perfect_predictions_score_zero() {
        let dims = DimensionSet::case_study();
        let truth = table(&[("a", [50.0, 60.0, 70.0, 40.0, 30.0]), ("b", [55.0, 61.0, 72.0, 44.0, 35.0])]);
        let pre = table(&[("a", [40.0; 5]), ("b", [42.0; 5])]);
        let reports = evaluate(&dims, &[(Method::Concept, vec![truth.clone()])], &truth, &pre, false).unwrap();
        assert_eq!(reports.iter().map(|r| r.method).collect::<Vec<_>>(), vec![Method::Mean, Method::Concept]);
        for m in &reports[1].per_dimension {
            assert_eq!((m.rmse, m.mae, m.t_p), (0.0, 0.0, 1.0));
        }
        let tables = render_tables(&dims, &reports);
        for d in dims.dimensions() {
            assert!(tables.contains(&d.name));
        }
    }

    #[test]
    fn repeated_runs_add_robustness() {
        let dims = DimensionSet::case_study();
        let truth = table(&[("a", [50.0; 5]), ("b", [60.0; 5])]);
        let pre = table(&[("a", [40.0; 5]), ("b", [45.0; 5])]);
        let reports = evaluate(
            &dims,
            &[(Method::Scales, vec![truth.clone(), truth.clone()])],
            &truth,
            &pre,
            false,
        )
        .unwrap();
        let r = reports[1].robustness.as_ref().unwrap();
        assert!(r.per_dimension.iter().all(|d| d.max_variance == 0.0));
    }

    #[test]
    fn missing_agent_is_a_usage_error() {
        let dims = DimensionSet::case_study();
        let truth = table(&[("a", [50.0; 5])]);
        let pred = table(&[("a", [50.0; 5]), ("z", [1.0; 5])]);
        let err = evaluate(&dims, &[(Method::Concept, vec![pred])], &truth, &truth, false).unwrap_err();
        assert!(err.to_string().contains("`z`"), "{err}");
    }

    #[test]
    fn prediction_flag_parsing() {
        assert_eq!(parse_prediction("Concept=a.json").unwrap(), (Method::Concept, PathBuf::from("a.json")));
        assert!(parse_prediction("mean=a.json").is_err());
        assert!(parse_prediction("a.json").is_err());
    }
}
