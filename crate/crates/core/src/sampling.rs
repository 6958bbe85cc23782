//! Stratified cohort sampling.
//!
//! Numeric keys (scores, traits, attributes) are cut into terciles at the
//! population's 1/3 and 2/3 quantiles; categorical keys (endowment values)
//! are used as-is. The stratum is the tuple of all key bins.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::StudentProfile;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledAgent {
    pub agent_id: String,
    pub stratum: String,
}

enum KeyValue<'a> {
    Numeric(f64),
    Categorical(&'a str),
}

fn lookup<'a>(profile: &'a StudentProfile, key: &str) -> Option<KeyValue<'a>> {
    profile
        .scores
        .get(key)
        .or_else(|| profile.traits.get(key))
        .or_else(|| profile.attributes.get(key))
        .map(|v| KeyValue::Numeric(*v))
        .or_else(|| {
            profile
                .endowment
                .get(key)
                .map(|v| KeyValue::Categorical(v.as_str()))
        })
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tercile bin of `v`: 0 up to the first cut, 1 up to the second, else 2.
pub fn tercile_bin(v: f64, cuts: (f64, f64)) -> u8 {
    if v <= cuts.0 {
        0
    } else if v <= cuts.1 {
        1
    } else {
        2
    }
}

/// Stratum label of every record, in input order.
pub fn assign_strata(population: &[StudentProfile], strata_keys: &[String]) -> Result<Vec<String>> {
    if population.is_empty() {
        return Err(CoreError::Empty("population"));
    }
    let mut columns: Vec<Vec<String>> = Vec::with_capacity(strata_keys.len());
    for key in strata_keys {
        let values: Vec<KeyValue> = population
            .iter()
            .map(|p| lookup(p, key).ok_or_else(|| CoreError::UnknownKey(key.clone())))
            .collect::<Result<_>>()?;
        let numeric: Option<Vec<f64>> = values
            .iter()
            .map(|v| match v {
                KeyValue::Numeric(x) => Some(*x),
                KeyValue::Categorical(_) => None,
            })
            .collect();
        let column = match numeric {
            Some(xs) => {
                let mut sorted = xs.clone();
                sorted.sort_by(f64::total_cmp);
                let cuts = (quantile(&sorted, 1.0 / 3.0), quantile(&sorted, 2.0 / 3.0));
                xs.iter()
                    .map(|x| format!("{key}={}", tercile_bin(*x, cuts)))
                    .collect()
            }
            None => values
                .iter()
                .map(|v| match v {
                    KeyValue::Categorical(s) => format!("{key}={s}"),
                    KeyValue::Numeric(x) => format!("{key}={x}"),
                })
                .collect(),
        };
        columns.push(column);
    }
    Ok((0..population.len())
        .map(|i| {
            columns
                .iter()
                .map(|c| c[i].as_str())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect())
}

/// Picks `min(per_stratum, |stratum|)` agents from every stratum.
///
/// Strata are visited in sorted label order and members are shuffled by one
/// ChaCha stream seeded with `seed`, so the output is a pure function of the
/// inputs.
pub fn stratified_sample(
    population: &[StudentProfile],
    strata_keys: &[String],
    per_stratum: usize,
    seed: u64,
) -> Result<Vec<SampledAgent>> {
    if per_stratum == 0 {
        return Err(CoreError::invalid("per_stratum", "must be at least 1"));
    }
    let mut ids = BTreeSet::new();
    for p in population {
        if !ids.insert(p.agent_id.as_str()) {
            return Err(CoreError::invalid(
                "population",
                format!("duplicate agent id `{}`", p.agent_id),
            ));
        }
    }
    let labels = assign_strata(population, strata_keys)?;
    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        strata.entry(label.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (label, mut members) in strata {
        members.shuffle(&mut rng);
        for &i in members.iter().take(per_stratum) {
            out.push(SampledAgent {
                agent_id: population[i].agent_id.clone(),
                stratum: label.to_string(),
            });
        }
    }
    Ok(out)
}
