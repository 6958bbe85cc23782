#![allow(dead_code)]

use std::collections::BTreeSet;

/// Every (id, score) pair with a positive overlap, best first, ids ascending on ties.
pub fn keyword_ranking(agent: &[&str], records: &[(String, Vec<String>)], k: usize) -> Vec<(String, usize)> {
    let agent: BTreeSet<String> = agent.iter().map(|w| w.to_lowercase()).collect();
    let mut all: Vec<(String, usize)> = Vec::new();
    for (id, keywords) in records {
        let mut seen = BTreeSet::new();
        let mut score = 0;
        for kw in keywords {
            let kw = kw.to_lowercase();
            if agent.contains(&kw) && seen.insert(kw) {
                score += 1;
            }
        }
        if score > 0 {
            all.push((id.clone(), score));
        }
    }
    // selection sort: repeatedly take the best remaining
    let mut out = Vec::new();
    while out.len() < k && !all.is_empty() {
        let mut best = 0;
        for i in 1..all.len() {
            let (ref id, s) = all[i];
            let (ref bid, bs) = all[best];
            if s > bs || (s == bs && id < bid) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for i in 0..u.len() {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    dot / (nu.sqrt() * nv.sqrt())
}

pub fn cosine_ranking(query: &[f64], records: &[(String, Vec<f64>)], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = records.iter().map(|(id, v)| (id.clone(), cosine(query, v))).collect();
    let mut out = Vec::new();
    while out.len() < k && !all.is_empty() {
        let mut best = 0;
        for i in 1..all.len() {
            if all[i].1 > all[best].1 || (all[i].1 == all[best].1 && all[i].0 < all[best].0) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

/// Average-linkage clustering computed from scratch at every step: the
/// linkage of two clusters is the mean of all cross pairs.
pub fn average_linkage(vectors: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
    let dist = |a: usize, b: usize| (1.0 - cosine(&vectors[a], &vectors[b])).clamp(0.0, 2.0);
    let mut clusters: Vec<Vec<usize>> = (0..vectors.len()).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let mut total = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        total += dist(a, b);
                    }
                }
                let d = total / (clusters[i].len() * clusters[j].len()) as f64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            Some((d, i, j)) if d < threshold => {
                let moved = clusters.remove(j);
                clusters[i].extend(moved);
                clusters[i].sort_unstable();
            }
            _ => break,
        }
    }
    clusters.sort();
    clusters
}
