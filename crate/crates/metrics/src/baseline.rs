//! Reference predictors: the pre-test column mean, and in-sample OLS that
//! needs post-test data.

use serde::{Deserialize, Serialize};

use crate::{MetricsError, Result};

fn check_rectangular(matrix: &[Vec<f64>]) -> Result<usize> {
    let cols = matrix.first().map_or(0, Vec::len);
    for (row, values) in matrix.iter().enumerate() {
        if values.len() != cols {
            return Err(MetricsError::Ragged {
                row,
                got: values.len(),
                expected: cols,
            });
        }
    }
    Ok(cols)
}

/// Predict every agent's value of dimension `j` as the column mean of the
/// pre-test matrix (`agents x dimensions`).
pub fn baseline_mean_predict(pretest: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if pretest.is_empty() {
        return Err(MetricsError::Empty("pretest matrix"));
    }
    let cols = check_rectangular(pretest)?;
    let n = pretest.len() as f64;
    let means: Vec<f64> = (0..cols)
        .map(|j| pretest.iter().map(|row| row[j]).sum::<f64>() / n)
        .collect();
    Ok(vec![means; pretest.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Intercept first, then one coefficient per feature column.
    pub coefficients: Vec<f64>,
    /// In-sample fitted values.
    pub predictions: Vec<f64>,
    pub requires_posttest: bool,
}

/// Ordinary least squares of `y` on `[1, x]`.
///
/// Solves the normal equations with a Cholesky factorization of the
/// column-equilibrated Gram matrix. A pivot that collapses below tolerance
/// means that column lies in the span of the earlier ones; the error names it
/// together with the columns it depends on.
#[allow(clippy::needless_range_loop)]
pub fn regression_reference(
    x: &[Vec<f64>],
    y: &[f64],
    feature_names: &[String],
) -> Result<RegressionFit> {
    let rows = x.len();
    if rows != y.len() {
        return Err(MetricsError::LengthMismatch {
            left: rows,
            right: y.len(),
        });
    }
    if rows == 0 {
        return Err(MetricsError::Empty("design matrix"));
    }
    let features = check_rectangular(x)?;
    let p = features + 1;
    if rows < features + 1 {
        return Err(MetricsError::TooFew {
            needed: features + 1,
            got: rows,
        });
    }
    let name = |j: usize| -> String {
        if j == 0 {
            "intercept".to_string()
        } else {
            feature_names
                .get(j - 1)
                .cloned()
                .unwrap_or_else(|| format!("x{}", j - 1))
        }
    };
    let design = |i: usize, j: usize| if j == 0 { 1.0 } else { x[i][j - 1] };

    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for i in 0..rows {
        for a in 0..p {
            let xa = design(i, a);
            rhs[a] += xa * y[i];
            for b in a..p {
                gram[a][b] += xa * design(i, b);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    let scale: Vec<f64> = (0..p).map(|j| gram[j][j].sqrt()).collect();
    if let Some(j) = scale.iter().position(|s| *s == 0.0) {
        return Err(MetricsError::RankDeficient {
            column: name(j),
            with: vec![],
        });
    }
    let scaled: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| gram[a][b] / (scale[a] * scale[b])).collect())
        .collect();

    const PIVOT_TOL: f64 = 1e-10;
    let mut l = vec![vec![0.0; p]; p];
    for k in 0..p {
        let pivot = scaled[k][k] - (0..k).map(|m| l[k][m] * l[k][m]).sum::<f64>();
        if pivot <= PIVOT_TOL {
            let with = collinear_partners(&l, &scaled, k)
                .into_iter()
                .map(name)
                .collect();
            return Err(MetricsError::RankDeficient {
                column: name(k),
                with,
            });
        }
        l[k][k] = pivot.sqrt();
        for i in k + 1..p {
            let s = scaled[i][k] - (0..k).map(|m| l[i][m] * l[k][m]).sum::<f64>();
            l[i][k] = s / l[k][k];
        }
    }
    let b: Vec<f64> = (0..p).map(|j| rhs[j] / scale[j]).collect();
    let z = cholesky_solve(&l, &b, p);
    let coefficients: Vec<f64> = (0..p).map(|j| z[j] / scale[j]).collect();
    let predictions = (0..rows)
        .map(|i| (0..p).map(|j| design(i, j) * coefficients[j]).sum())
        .collect();
    Ok(RegressionFit {
        coefficients,
        predictions,
        requires_posttest: true,
    })
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64], p: usize) -> Vec<f64> {
    let mut w = vec![0.0; p];
    for i in 0..p {
        w[i] = (b[i] - (0..i).map(|m| l[i][m] * w[m]).sum::<f64>()) / l[i][i];
    }
    let mut z = vec![0.0; p];
    for i in (0..p).rev() {
        z[i] = (w[i] - (i + 1..p).map(|m| l[m][i] * z[m]).sum::<f64>()) / l[i][i];
    }
    z
}

/// Columns among `0..k` that column `k` is a combination of, from the
/// already-factored leading block.
fn collinear_partners(l: &[Vec<f64>], scaled: &[Vec<f64>], k: usize) -> Vec<usize> {
    if k == 0 {
        return vec![];
    }
    let rhs: Vec<f64> = (0..k).map(|i| scaled[i][k]).collect();
    let coef = cholesky_solve(l, &rhs, k);
    coef.iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 1e-8)
        .map(|(i, _)| i)
        .collect()
}
