//! Slow, obviously-correct reference implementations used only by tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..pred.len() {
        total += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    }
    (total / pred.len() as f64).sqrt()
}

pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..pred.len() {
        total += (pred[i] - truth[i]).abs();
    }
    total / pred.len() as f64
}

/// ARI by explicit pair counting over every unordered pair of items.
/// Undefined cases return 1.
pub fn ari_pairs<A: PartialEq, B: PartialEq>(u: &[A], v: &[B]) -> f64 {
    let (mut both, mut only_u, mut only_v, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            match (u[i] == u[j], v[i] == v[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_u += 1.0,
                (false, true) => only_v += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + only_u) * (only_u + neither) + (both + only_v) * (only_v + neither);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_u * only_v) / denom
}

fn probabilities<K: Ord>(keys: impl Iterator<Item = K>, n: f64) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

/// NMI from the definition `sum p(u,v) ln(p(u,v) / (p(u) p(v)))`.
pub fn nmi_direct<A: Ord, B: Ord>(u: &[A], v: &[B]) -> f64 {
    let n = u.len() as f64;
    let pu = probabilities(u.iter(), n);
    let pv = probabilities(v.iter(), n);
    let puv = probabilities(u.iter().zip(v.iter()), n);
    let mut mi = 0.0;
    for ((a, b), p) in &puv {
        mi += p * (p / (pu[a] * pv[b])).ln();
    }
    let hu: f64 = pu.values().map(|p| -p * p.ln()).sum();
    let hv: f64 = pv.values().map(|p| -p * p.ln()).sum();
    if hu == 0.0 || hv == 0.0 {
        return if hu == 0.0 && hv == 0.0 { 1.0 } else { 0.0 };
    }
    mi / (hu * hv).sqrt()
}

/// Rank of each value among all values, tied values sharing the average.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|x| {
            let below = values.iter().filter(|y| *y < x).count() as f64;
            let equal = values.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Wilcoxon signed-rank statistic `min(W+, W-)` and the two-sided p-value
/// `P(min(W+, W-) <= observed)` by enumerating every sign assignment.
pub fn wilcoxon_enumerate(differences: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = differences.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return (0.0, 1.0);
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = mid_ranks(&abs);
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let observed = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u64..(1u64 << n) {
        let wp: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if wp.min(total - wp) <= observed + 1e-9 {
            hits += 1;
        }
    }
    (observed, hits as f64 / (1u64 << n) as f64)
}
