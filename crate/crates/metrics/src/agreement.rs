//! Inter-rater agreement and partition agreement.

use std::collections::{BTreeMap, BTreeSet};

use crate::{MetricsError, Result};

/// Gwet's AC1 for two raters.
///
/// `categories` is the declared category set; labels outside it (categories
/// the raters introduced) are added, and `Q` is the size of the union.
pub fn gwets_ac1<L: Ord + Clone>(labels_a: &[L], labels_b: &[L], categories: &[L]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(MetricsError::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    if labels_a.is_empty() {
        return Err(MetricsError::Empty("rater labels"));
    }
    let n = labels_a.len() as f64;
    let mut counts: BTreeMap<&L, usize> = categories.iter().map(|c| (c, 0)).collect();
    for label in labels_a.iter().chain(labels_b) {
        *counts.entry(label).or_default() += 1;
    }
    let q = counts.len();
    if q < 2 {
        return Err(MetricsError::TooFewCategories(q));
    }
    let agree = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count() as f64;
    let pa = agree / n;
    let pe = counts
        .values()
        .map(|&c| {
            let pi = c as f64 / (2.0 * n);
            pi * (1.0 - pi)
        })
        .sum::<f64>()
        / (q as f64 - 1.0);
    if pe >= 1.0 {
        return Err(MetricsError::DegenerateChance);
    }
    Ok((pa - pe) / (1.0 - pe))
}

struct Contingency {
    n: usize,
    cells: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn contingency<A: Ord, B: Ord>(u: &[A], v: &[B]) -> Result<Contingency> {
    if u.len() != v.len() {
        return Err(MetricsError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(MetricsError::Empty("partition"));
    }
    let mut cells: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    let mut rows: BTreeMap<&A, usize> = BTreeMap::new();
    let mut cols: BTreeMap<&B, usize> = BTreeMap::new();
    for (a, b) in u.iter().zip(v) {
        *cells.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    Ok(Contingency {
        n: u.len(),
        cells: cells.into_values().collect(),
        rows: rows.into_values().collect(),
        cols: cols.into_values().collect(),
    })
}

fn pairs(k: usize) -> f64 {
    let k = k as f64;
    k * (k - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index from the contingency table.
///
/// Returns 1 when the index is undefined because both partitions are
/// trivial in the same way (a single cluster each, or all singletons each).
pub fn adjusted_rand_index<A: Ord, B: Ord>(part_u: &[A], part_v: &[B]) -> Result<f64> {
    let table = contingency(part_u, part_v)?;
    if table.n < 2 {
        return Ok(1.0);
    }
    let index: f64 = table.cells.iter().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = table.rows.iter().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = table.cols.iter().map(|&c| pairs(c)).sum();
    let expected = sum_rows * sum_cols / pairs(table.n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Normalized mutual information `I(U; V) / sqrt(H(U) H(V))`, natural log.
///
/// If either entropy is zero the result is 0, except when both partitions
/// are the single all-items cluster, which gives 1.
pub fn normalized_mutual_info<A: Ord, B: Ord>(part_u: &[A], part_v: &[B]) -> Result<f64> {
    let table = contingency(part_u, part_v)?;
    let n = table.n as f64;
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hu = entropy(&table.rows);
    let hv = entropy(&table.cols);
    if hu == 0.0 || hv == 0.0 {
        return Ok(if hu == 0.0 && hv == 0.0 { 1.0 } else { 0.0 });
    }
    // I(U;V) = H(U) + H(V) - H(U,V)
    let joint = entropy(&table.cells);
    let mi = (hu + hv - joint).max(0.0);
    Ok((mi / (hu * hv).sqrt()).min(1.0))
}

/// Distinct labels, for callers that want the category set of a labeling.
pub fn label_set<L: Ord + Clone>(labels: &[L]) -> Vec<L> {
    labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}
