use serde::{Deserialize, Serialize};

use crate::{MetricsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionVariance {
    pub dimension: String,
    pub mean_variance: f64,
    pub max_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub runs: usize,
    pub per_dimension: Vec<DimensionVariance>,
    /// `[agent][dimension]` sample variance across runs.
    pub cell_variances: Vec<Vec<f64>>,
}

/// Sample variance of each (agent, dimension) cell across repeated runs.
///
/// `runs[r][a][d]` is the final value of dimension `d` for agent `a` in run `r`.
pub fn robustness_variance(runs: &[Vec<Vec<f64>>], dimensions: &[String]) -> Result<RobustnessSummary> {
    if runs.len() < 2 {
        return Err(MetricsError::TooFew {
            needed: 2,
            got: runs.len(),
        });
    }
    let agents = runs[0].len();
    if agents == 0 {
        return Err(MetricsError::Empty("agents"));
    }
    for run in runs {
        if run.len() != agents {
            return Err(MetricsError::LengthMismatch {
                left: agents,
                right: run.len(),
            });
        }
        for (row, values) in run.iter().enumerate() {
            if values.len() != dimensions.len() {
                return Err(MetricsError::Ragged {
                    row,
                    got: values.len(),
                    expected: dimensions.len(),
                });
            }
        }
    }
    let r = runs.len() as f64;
    let cell_variances: Vec<Vec<f64>> = (0..agents)
        .map(|a| {
            (0..dimensions.len())
                .map(|d| {
                    let mean = runs.iter().map(|run| run[a][d]).sum::<f64>() / r;
                    runs.iter().map(|run| (run[a][d] - mean).powi(2)).sum::<f64>() / (r - 1.0)
                })
                .collect()
        })
        .collect();
    let per_dimension = dimensions
        .iter()
        .enumerate()
        .map(|(d, name)| {
            let column = cell_variances.iter().map(|row| row[d]);
            DimensionVariance {
                dimension: name.clone(),
                mean_variance: column.clone().sum::<f64>() / agents as f64,
                max_variance: column.fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(RobustnessSummary {
        runs: runs.len(),
        per_dimension,
        cell_variances,
    })
}
