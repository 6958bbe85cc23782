use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use devsim_core::files::{read_jsonl, write_json, write_jsonl};
use devsim_core::promptkit::{PromptTemplate, TemplateRole};
use devsim_core::taxonomy::{
    cluster_terms, coarse_classify_with, default_stopwords, extract_terms, read_embeddings, sample_for_card_sort,
    tokenize, CoarseCategory, Document, TermRecord, DEFAULT_BATCH_SIZE, DEFAULT_CUT_THRESHOLD,
    DEFAULT_MAX_IN_FLIGHT,
};
use devsim_core::{Branch, Subcategory, Taxonomy};
use devsim_llm::{Embedder, HashingEmbedder};
use devsim_metrics::{adjusted_rand_index, gwets_ac1, label_set, normalized_mutual_info};
use serde::{Deserialize, Serialize};

use super::{backends, create_dir, write_text};
use crate::config::{BackendConfig, BackendKind};
use crate::error::{CliError, Result};
use crate::Global;

pub const TERMS_FILE: &str = "terms.jsonl";
pub const CLUSTERS_FILE: &str = "clusters.json";
pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const CARD_SORT_FILE: &str = "card_sort.tsv";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const AGREEMENT_FILE: &str = "agreement.json";
pub const AGREEMENT_TABLE_FILE: &str = "agreement.txt";

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Documents as JSON lines: {"title": .., "abstract": ..}.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub min_frequency: usize,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_IN_FLIGHT)]
    pub max_in_flight: usize,
    /// Cosine-distance cut of the dendrogram.
    #[arg(long, default_value_t = DEFAULT_CUT_THRESHOLD)]
    pub threshold: f64,
    /// Term vectors, one `term v1 v2 ..` per line. Without it terms are
    /// embedded by the backend, or with the mock by hashing the abstracts
    /// each term occurs in.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub embedding_dim: usize,
    /// Canned responses for the mock backend.
    #[arg(long)]
    pub mock_rules: Option<PathBuf>,
    /// Base URL of the HTTP backend.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub branch: Branch,
    pub cluster: usize,
    pub terms: Vec<String>,
    pub central: Vec<String>,
    pub peripheral: Vec<String>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetadata {
    pub documents: usize,
    pub min_frequency: usize,
    pub terms_extracted: usize,
    pub batch_size: usize,
    pub backend: String,
    pub classify_template_hash: String,
    pub category_counts: BTreeMap<String, usize>,
    pub embedding_source: String,
    pub terms_without_vector: Vec<String>,
    pub linkage: String,
    pub metric: String,
    pub cut_threshold: f64,
    pub clusters: BTreeMap<String, usize>,
    pub seed: u64,
}

fn category_name(c: CoarseCategory) -> &'static str {
    match c {
        CoarseCategory::Other => "other",
        CoarseCategory::Environment => "learning_environment",
        CoarseCategory::Endowment => "endowment_dimensions",
        CoarseCategory::Developmental => "developmental_dimensions",
    }
}

fn branch_prefix(b: Branch) -> &'static str {
    match b {
        Branch::LearningEnvironment => "env",
        Branch::EndowmentDimensions => "endow",
        Branch::DevelopmentalDimensions => "dev",
    }
}

/// Hashes, for every term, the text of the documents it occurs in.
fn context_vectors(records: &[TermRecord], documents: &[Document], dim: usize) -> Result<Vec<Vec<f64>>> {
    let doc_tokens: Vec<BTreeSet<String>> = documents.iter().map(|d| tokenize(&d.abstract_text).collect()).collect();
    let texts: Vec<String> = records
        .iter()
        .map(|r| {
            documents
                .iter()
                .zip(&doc_tokens)
                .filter(|(_, tokens)| tokens.contains(&r.term))
                .map(|(d, _)| d.abstract_text.as_str())
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    Ok(HashingEmbedder::new(dim).embed(&texts)?)
}

pub fn build(global: &Global, args: &BuildArgs) -> Result<()> {
    let out = global
        .overrides
        .out
        .as_deref()
        .ok_or_else(|| CliError::usage("taxonomy build needs --out"))?;
    let documents: Vec<Document> = read_jsonl(&args.corpus)?;
    if documents.is_empty() {
        return Err(CliError::usage(format!("{}: the corpus has no documents", args.corpus.display())));
    }
    let mut backend_config = BackendConfig {
        kind: global.backend(),
        ..BackendConfig::default()
    };
    if let Some(url) = &args.endpoint {
        backend_config.http.base_url = url.clone();
    }
    if let Some(model) = &args.model {
        backend_config.http.model = model.clone();
    }
    let b = backends(&backend_config, args.mock_rules.as_deref())?;

    let mut records = extract_terms(&documents, &default_stopwords(), args.min_frequency)?;
    if records.is_empty() {
        return Err(CliError::usage(format!(
            "no term reaches frequency {} in {}",
            args.min_frequency,
            args.corpus.display()
        )));
    }
    let template = PromptTemplate::builtin(TemplateRole::Classify);
    let names: Vec<String> = records.iter().map(|r| r.term.clone()).collect();
    let categories = coarse_classify_with(&names, args.batch_size, b.generator.as_ref(), &template, args.max_in_flight)?;
    for r in &mut records {
        r.coarse_category = categories.get(&r.term).copied().unwrap_or_default();
    }

    let (embedding_source, missing) = match (&args.embeddings, global.backend()) {
        (Some(path), _) => {
            let table = read_embeddings(path)?;
            let missing = table.attach(&mut records);
            (format!("file:{}", path.display()), missing)
        }
        (None, BackendKind::Http) => {
            let vectors = b.embedder.embed(&names)?;
            for (r, v) in records.iter_mut().zip(vectors) {
                r.vector = Some(v);
            }
            (b.embedder.embedder_id(), Vec::new())
        }
        (None, BackendKind::Mock) => {
            let vectors = context_vectors(&records, &documents, args.embedding_dim)?;
            for (r, v) in records.iter_mut().zip(vectors) {
                r.vector = Some(v);
            }
            (format!("context-hashing-{}", args.embedding_dim), Vec::new())
        }
    };
    for term in &missing {
        log::warn!("no vector for `{term}`; left out of clustering");
    }

    let mut summaries = Vec::new();
    let mut branches: BTreeMap<Branch, Vec<Subcategory>> = BTreeMap::new();
    let mut cluster_counts = BTreeMap::new();
    let mut linkage = (String::from("average"), String::from("cosine"));
    for branch in Branch::ALL {
        let subset: Vec<TermRecord> = records
            .iter()
            .filter(|r| r.coarse_category == branch.code() && r.vector.is_some())
            .cloned()
            .collect();
        let subs = branches.entry(branch).or_default();
        if subset.is_empty() {
            cluster_counts.insert(category_name(branch.code()).to_string(), 0);
            continue;
        }
        let result = cluster_terms(&subset, args.threshold)?;
        linkage = (result.linkage.clone(), result.metric.clone());
        cluster_counts.insert(category_name(branch.code()).to_string(), result.clusters.len());
        for (i, cluster) in result.clusters.iter().enumerate() {
            let sample = sample_for_card_sort(cluster, &subset);
            if cluster.terms.len() > 1 {
                let lead = sample.central.first().cloned().unwrap_or_default();
                subs.push(Subcategory {
                    id: format!("{}-{:02}", branch_prefix(branch), i + 1),
                    name: format!("{} ({})", lead, i + 1),
                    description: format!("Cluster of {} terms", cluster.terms.len()),
                    terms: cluster.terms.clone(),
                });
            }
            summaries.push(ClusterSummary {
                branch,
                cluster: i + 1,
                terms: cluster.terms.clone(),
                central: sample.central,
                peripheral: sample.peripheral,
                degenerate: sample.degenerate,
            });
        }
    }
    let mut take = |b: Branch| branches.remove(&b).unwrap_or_default();
    let taxonomy = Taxonomy::new(
        take(Branch::LearningEnvironment),
        take(Branch::EndowmentDimensions),
        take(Branch::DevelopmentalDimensions),
    )?;

    let mut category_counts = BTreeMap::new();
    for r in &records {
        *category_counts.entry(category_name(r.coarse_category).to_string()).or_insert(0) += 1;
    }
    let metadata = PipelineMetadata {
        documents: documents.len(),
        min_frequency: args.min_frequency,
        terms_extracted: records.len(),
        batch_size: args.batch_size,
        backend: b.generator.backend_id(),
        classify_template_hash: template.hash(),
        category_counts,
        embedding_source,
        terms_without_vector: missing,
        linkage: linkage.0,
        metric: linkage.1,
        cut_threshold: args.threshold,
        clusters: cluster_counts,
        seed: global.seed(),
    };

    create_dir(out)?;
    let plain: Vec<TermRecord> = records.iter().map(|r| TermRecord { vector: None, ..r.clone() }).collect();
    write_jsonl(&out.join(TERMS_FILE), &plain)?;
    write_json(&out.join(CLUSTERS_FILE), &summaries)?;
    write_json(&out.join(TAXONOMY_FILE), &taxonomy)?;
    write_text(&out.join(CARD_SORT_FILE), &card_sort_table(&summaries))?;
    write_json(&out.join(PIPELINE_FILE), &metadata)?;
    println!(
        "{} documents, {} terms, {} clusters -> {}",
        metadata.documents,
        metadata.terms_extracted,
        summaries.len(),
        out.display()
    );
    Ok(())
}

/// The workbook handed to the card sorters: one row per sampled term.
pub fn card_sort_table(summaries: &[ClusterSummary]) -> String {
    let mut out = String::from("branch\tcluster\trole\trank\tterm\tcategory\n");
    for s in summaries {
        let branch = category_name(s.branch.code());
        let roles = s
            .central
            .iter()
            .map(|t| ("central", t))
            .enumerate()
            .chain(s.peripheral.iter().map(|t| ("peripheral", t)).enumerate());
        for (rank, (role, term)) in roles {
            let _ = writeln!(out, "{branch}\t{}\t{role}\t{}\t{term}\t", s.cluster, rank + 1);
        }
    }
    out
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// First expert's card sort: CSV with columns term,branch,label.
    #[arg(long)]
    pub expert_a: PathBuf,
    #[arg(long)]
    pub expert_b: PathBuf,
    /// Cluster assignment of the same terms, same columns.
    #[arg(long)]
    pub clusters: PathBuf,
    /// The experts' reconciled sort, compared with the clusters. Defaults
    /// to the first expert.
    #[arg(long)]
    pub consensus: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
struct LabelRow {
    term: String,
    branch: String,
    label: String,
}

#[derive(Debug, Clone)]
pub struct Labels {
    /// term -> (branch, label)
    rows: BTreeMap<String, (Branch, String)>,
}

fn parse_branch(s: &str) -> Option<Branch> {
    let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
    Branch::ALL.into_iter().find(|b| {
        category_name(b.code()) == key || b.title().to_ascii_lowercase().replace(' ', "_") == key || branch_prefix(*b) == key
    })
}

impl Labels {
    pub fn read(path: &Path) -> Result<Self> {
        let csv_err = |source| CliError::Csv {
            path: path.display().to_string(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
        let mut rows = BTreeMap::new();
        for row in reader.deserialize::<LabelRow>() {
            let row = row.map_err(csv_err)?;
            let branch = parse_branch(&row.branch)
                .ok_or_else(|| CliError::usage(format!("{}: unknown branch `{}`", path.display(), row.branch)))?;
            if rows.insert(row.term.clone(), (branch, row.label)).is_some() {
                return Err(CliError::usage(format!("{}: term `{}` listed twice", path.display(), row.term)));
            }
        }
        if rows.is_empty() {
            return Err(CliError::usage(format!("{}: no labels", path.display())));
        }
        Ok(Self { rows })
    }

    fn labels(&self, terms: &[&String]) -> Vec<String> {
        terms.iter().map(|t| self.rows[*t].1.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub ac1: Option<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub terms: usize,
    pub overall: AgreementRow,
    pub per_branch: BTreeMap<Branch, AgreementRow>,
}

fn agreement(a: &Labels, b: &Labels, consensus: &Labels, clusters: &Labels, terms: &[&String]) -> AgreementRow {
    if terms.is_empty() {
        return AgreementRow { ac1: None, ari: None, nmi: None };
    }
    let la = a.labels(terms);
    let lb = b.labels(terms);
    let mut categories = label_set(&la);
    categories.extend(label_set(&lb));
    let lc = consensus.labels(terms);
    let lk = clusters.labels(terms);
    AgreementRow {
        ac1: gwets_ac1(&la, &lb, &categories).ok(),
        ari: adjusted_rand_index(&lc, &lk).ok(),
        nmi: normalized_mutual_info(&lc, &lk).ok(),
    }
}

/// Inter-expert AC1 and consensus-vs-cluster ARI/NMI, overall and within
/// each branch (branches taken from the cluster file).
pub fn evaluate_agreement(a: &Labels, b: &Labels, consensus: &Labels, clusters: &Labels) -> Result<AgreementReport> {
    let terms: BTreeSet<&String> = clusters.rows.keys().collect();
    for (name, other) in [("expert A", a), ("expert B", b), ("consensus", consensus)] {
        let theirs: BTreeSet<&String> = other.rows.keys().collect();
        if theirs != terms {
            let diff: Vec<&&String> = terms.symmetric_difference(&theirs).take(5).collect();
            return Err(CliError::usage(format!("{name} and the clusters label different terms, e.g. {diff:?}")));
        }
    }
    let all: Vec<&String> = terms.iter().copied().collect();
    let overall = agreement(a, b, consensus, clusters, &all);
    let per_branch = Branch::ALL
        .into_iter()
        .map(|branch| {
            let subset: Vec<&String> = all.iter().copied().filter(|t| clusters.rows[*t].0 == branch).collect();
            (branch, agreement(a, b, consensus, clusters, &subset))
        })
        .collect();
    Ok(AgreementReport {
        terms: all.len(),
        overall,
        per_branch,
    })
}

/// Overall values sit on the first row of each column pair.
pub fn render_agreement(report: &AgreementReport) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
    let mut rows = vec![
        vec!["", "Inter-expert", "", "Expert-cluster", "", "", ""]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>(),
        vec!["Main Category", "AC1 overall", "AC1", "ARI overall", "ARI", "NMI overall", "NMI"]
            .into_iter()
            .map(String::from)
            .collect(),
    ];
    for (i, branch) in Branch::ALL.into_iter().enumerate() {
        let r = &report.per_branch[&branch];
        let first = |v: Option<f64>| if i == 0 { cell(v) } else { String::new() };
        rows.push(vec![
            branch.title().to_string(),
            first(report.overall.ac1),
            cell(r.ac1),
            first(report.overall.ari),
            cell(r.ari),
            first(report.overall.nmi),
            cell(r.nmi),
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn evaluate(global: &Global, args: &EvaluateArgs) -> Result<()> {
    let a = Labels::read(&args.expert_a)?;
    let b = Labels::read(&args.expert_b)?;
    let clusters = Labels::read(&args.clusters)?;
    let consensus = match &args.consensus {
        Some(p) => Labels::read(p)?,
        None => a.clone(),
    };
    let report = evaluate_agreement(&a, &b, &consensus, &clusters)?;
    let table = render_agreement(&report);
    print!("{table}");
    if let Some(out) = &global.overrides.out {
        create_dir(out)?;
        write_json(&out.join(AGREEMENT_FILE), &report)?;
        write_text(&out.join(AGREEMENT_TABLE_FILE), &table)?;
    }
    Ok(())
}
