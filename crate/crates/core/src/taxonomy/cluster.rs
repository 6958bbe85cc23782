use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TermRecord;
use crate::{CoreError, Result};

pub const DEFAULT_CUT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Indices into the clustered records, ascending.
    pub members: Vec<usize>,
    pub terms: Vec<String>,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Ordered by lowest member index.
    pub clusters: Vec<Cluster>,
    pub linkage: String,
    pub metric: String,
    pub cut_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardSortSample {
    pub central: Vec<String>,
    pub peripheral: Vec<String>,
    pub degenerate: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `1 - cos(a, b)`, clamped to [0, 2]. Both vectors must be non-zero.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (1.0 - dot / (norm(a) * norm(b))).clamp(0.0, 2.0)
}

fn vectors(records: &[TermRecord]) -> Result<Vec<&[f64]>> {
    let mut dim = None;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let v = r
            .vector
            .as_deref()
            .ok_or_else(|| CoreError::invalid("term record", format!("`{}` has no vector", r.term)))?;
        let expected = *dim.get_or_insert(v.len());
        if v.len() != expected {
            return Err(CoreError::DimensionMismatch {
                item: r.term.clone(),
                expected,
                got: v.len(),
            });
        }
        if !(norm(v) > 0.0) {
            return Err(CoreError::ZeroNorm(r.term.clone()));
        }
        out.push(v);
    }
    Ok(out)
}

/// Agglomerative clustering with average linkage over cosine distance.
///
/// The closest pair of clusters is merged while its linkage distance is
/// below `cut_threshold`. Ties go to the pair with the lowest member indices.
pub fn cluster_terms(records: &[TermRecord], cut_threshold: f64) -> Result<ClusterResult> {
    if !(cut_threshold.is_finite() && cut_threshold >= 0.0) {
        return Err(CoreError::invalid(
            "cut_threshold",
            format!("{cut_threshold} must be finite and non-negative"),
        ));
    }
    let vs = vectors(records)?;
    let n = vs.len();
    // sums[i * n + j]: total pairwise distance between the clusters in slots i and j
    let mut sums = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cosine_distance(vs[i], vs[j]);
            sums[i * n + j] = d;
            sums[j * n + i] = d;
        }
    }
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            let Some(mi) = &members[i] else { continue };
            for j in i + 1..n {
                let Some(mj) = &members[j] else { continue };
                let d = sums[i * n + j] / (mi.len() * mj.len()) as f64;
                if best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((d, i, j)) = best else { break };
        if !(d < cut_threshold) {
            break;
        }
        let absorbed = members[j].take().expect("active slot");
        members[i].as_mut().expect("active slot").extend(absorbed);
        for k in 0..n {
            if k != i && members[k].is_some() {
                let s = sums[k * n + i] + sums[k * n + j];
                sums[k * n + i] = s;
                sums[i * n + k] = s;
            }
        }
    }
    let dim = vs.first().map_or(0, |v| v.len());
    let clusters = members
        .into_iter()
        .flatten()
        .map(|mut m| {
            m.sort_unstable();
            let mut centroid = vec![0.0; dim];
            for &idx in &m {
                for (c, x) in centroid.iter_mut().zip(vs[idx]) {
                    *c += x;
                }
            }
            for c in &mut centroid {
                *c /= m.len() as f64;
            }
            Cluster {
                terms: m.iter().map(|&idx| records[idx].term.clone()).collect(),
                members: m,
                centroid,
            }
        })
        .collect();
    Ok(ClusterResult {
        clusters,
        linkage: "average".into(),
        metric: "cosine".into(),
        cut_threshold,
    })
}

/// Picks the three members nearest the centroid and the two farthest from
/// it. Clusters under five members come back whole, nearest first, split as
/// up to three central and the rest peripheral, and flagged degenerate.
pub fn sample_for_card_sort(cluster: &Cluster, records: &[TermRecord]) -> CardSortSample {
    let centroid_ok = norm(&cluster.centroid) > 0.0;
    let mut ranked: Vec<(f64, &str)> = cluster
        .members
        .iter()
        .filter_map(|&i| records.get(i))
        .map(|r| {
            let d = match r.vector.as_deref() {
                Some(v) if centroid_ok && norm(v) > 0.0 => cosine_distance(v, &cluster.centroid),
                _ => 1.0,
            };
            (d, r.term.as_str())
        })
        .collect();
    let nearest_first = |a: &(f64, &str), b: &(f64, &str)| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(b.1))
    };
    ranked.sort_by(nearest_first);
    let names = |xs: &[(f64, &str)]| xs.iter().map(|(_, t)| t.to_string()).collect::<Vec<_>>();
    if ranked.len() < 5 {
        let cut = ranked.len().min(3);
        return CardSortSample {
            central: names(&ranked[..cut]),
            peripheral: names(&ranked[cut..]),
            degenerate: true,
        };
    }
    let central = names(&ranked[..3]);
    let mut far = ranked.clone();
    far.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(b.1))
    });
    let peripheral = names(&far[..2]);
    CardSortSample {
        central,
        peripheral,
        degenerate: false,
    }
}
