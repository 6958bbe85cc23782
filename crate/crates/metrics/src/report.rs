use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{
    mae, paired_t_test, rmse, wilcoxon_signed_rank, PairedSample, Result, RobustnessSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mean,
    Concept,
    Scales,
    Regression,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mean, Method::Concept, Method::Scales, Method::Regression];

    pub fn label(self) -> &'static str {
        match self {
            Method::Mean => "Mean",
            Method::Concept => "Concept",
            Method::Scales => "Scales",
            Method::Regression => "Regression",
        }
    }

    /// Whether the method needs post-test outcomes from real students.
    pub fn requires_posttest(self) -> bool {
        matches!(self, Method::Regression)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionMetrics {
    pub dimension: String,
    pub n: usize,
    pub rmse: f64,
    pub mae: f64,
    pub t_stat: f64,
    pub t_p: f64,
    pub wilcoxon_stat: f64,
    pub wilcoxon_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: Method,
    pub requires_posttest: bool,
    pub per_dimension: Vec<DimensionMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness: Option<RobustnessSummary>,
}

impl MetricReport {
    pub fn dimension(&self, name: &str) -> Option<&DimensionMetrics> {
        self.per_dimension.iter().find(|d| d.dimension == name)
    }
}

/// Scores one method: one [`PairedSample`] per dimension.
pub fn evaluate_method(method: Method, samples: &[PairedSample]) -> Result<MetricReport> {
    let per_dimension = samples
        .iter()
        .map(|s| {
            let t = paired_t_test(s)?;
            let w = wilcoxon_signed_rank(s);
            Ok(DimensionMetrics {
                dimension: s.dimension().to_string(),
                n: s.len(),
                rmse: rmse(s),
                mae: mae(s),
                t_stat: t.t,
                t_p: t.p,
                wilcoxon_stat: w.statistic,
                wilcoxon_p: w.p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport {
        method,
        requires_posttest: method.requires_posttest(),
        per_dimension,
        robustness: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Rmse,
    Mae,
    TTestP,
    WilcoxonP,
}

impl MetricKind {
    fn title(self) -> &'static str {
        match self {
            MetricKind::Rmse => "RMSE between prediction and true post-test values",
            MetricKind::Mae => "MAE between prediction and true post-test values",
            MetricKind::TTestP => "Paired t-test p-values (two-sided)",
            MetricKind::WilcoxonP => "Wilcoxon signed-rank p-values (two-sided)",
        }
    }

    fn value(self, m: &DimensionMetrics) -> f64 {
        match self {
            MetricKind::Rmse => m.rmse,
            MetricKind::Mae => m.mae,
            MetricKind::TTestP => m.t_p,
            MetricKind::WilcoxonP => m.wilcoxon_p,
        }
    }

    fn precision(self) -> usize {
        match self {
            MetricKind::Rmse | MetricKind::Mae => 2,
            MetricKind::TTestP | MetricKind::WilcoxonP => 4,
        }
    }
}

/// Plain-text table with dimensions as rows and the four methods as
/// columns. Methods without a report render as `n/a`.
pub fn render_comparison_table(
    kind: MetricKind,
    dimensions: &[(String, String)],
    reports: &[MetricReport],
) -> String {
    let header: Vec<String> = std::iter::once("Dimension".to_string())
        .chain(Method::ALL.iter().map(|m| {
            if m.requires_posttest() {
                format!("{} (ref)", m.label())
            } else {
                m.label().to_string()
            }
        }))
        .collect();
    let mut rows: Vec<Vec<String>> = vec![header];
    for (key, display) in dimensions {
        let mut row = vec![display.clone()];
        for method in Method::ALL {
            let cell = reports
                .iter()
                .find(|r| r.method == method)
                .and_then(|r| r.dimension(key))
                .map(|m| format!("{:.*}", kind.precision(), kind.value(m)))
                .unwrap_or_else(|| "n/a".to_string());
            row.push(cell);
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{}", kind.title());
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let _ = writeln!(out, "{}", "-".repeat(rule));
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(rule));
        }
    }
    let _ = writeln!(out, "{}", "-".repeat(rule));
    let _ = writeln!(out, "(ref) requires post-test data from real students.");
    out
}
