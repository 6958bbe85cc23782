use serde::{Deserialize, Serialize};

use crate::special::{normal_upper_tail, student_t_two_sided};
use crate::{MetricsError, PairedSample, Result};

/// Largest number of non-zero differences handled by exact enumeration.
pub const WILCOXON_EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
}

/// Paired Student t-test on `prediction - truth`.
///
/// When the differences have zero variance the statistic is defined as 0 and
/// the p-value as 1.
pub fn paired_t_test(sample: &PairedSample) -> Result<TTestResult> {
    let n = sample.len();
    if n < 2 {
        return Err(MetricsError::TooFew { needed: 2, got: n });
    }
    let d = sample.differences();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let df = nf - 1.0;
    if var == 0.0 {
        return Ok(TTestResult { t: 0.0, p: 1.0, df });
    }
    let t = mean / (var.sqrt() / nf.sqrt());
    Ok(TTestResult {
        t,
        p: student_t_two_sided(t, df),
        df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    /// Two-sided.
    pub p: f64,
    pub exact: bool,
}

/// Mid-ranks of `values` (1-based), ties sharing the mean of their positions.
fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    (ranks, tie_sizes)
}

/// Wilcoxon signed-rank test on `prediction - truth`.
///
/// Zero differences are dropped. With at most [`WILCOXON_EXACT_MAX_N`]
/// remaining pairs the p-value comes from the exact null distribution of
/// `W+` over all sign assignments (ties keep their mid-ranks); above that a
/// normal approximation with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(sample: &PairedSample) -> WilcoxonResult {
    let d: Vec<f64> = sample
        .differences()
        .into_iter()
        .filter(|x| *x != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return WilcoxonResult {
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            n: 0,
            p: 1.0,
            exact: true,
        };
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let (ranks, ties) = mid_ranks(&abs);
    let w_plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(x, _)| **x > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let (p, exact) = if n <= WILCOXON_EXACT_MAX_N {
        (exact_p(&ranks, statistic), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
        ((2.0 * normal_upper_tail(z)).min(1.0), false)
    };
    WilcoxonResult {
        statistic,
        w_plus,
        w_minus,
        n,
        p,
        exact,
    }
}

/// `min(1, 2 P(W+ <= w))` under the null, by counting sign assignments.
///
/// Mid-ranks are multiples of 1/2, so the distribution is built over doubled
/// ranks, which are integers.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max_sum + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let at_or_below: f64 = counts[..=limit.min(max_sum)].iter().sum();
    let total = 2f64.powi(ranks.len() as i32);
    (2.0 * at_or_below / total).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: &[f64], t: &[f64]) -> PairedSample {
        PairedSample::new("d", p.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn identical_samples_give_unit_p() {
        let s = sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert_eq!(
            paired_t_test(&s).unwrap(),
            TTestResult { t: 0.0, p: 1.0, df: 2.0 }
        );
        let w = wilcoxon_signed_rank(&s);
        assert_eq!((w.statistic, w.p, w.n), (0.0, 1.0, 0));
    }

    #[test]
    fn swapping_negates_t_and_keeps_p() {
        let s = sample(&[3.0, 5.0, 4.5, 9.0], &[1.0, 2.0, 6.0, 4.0]);
        let a = paired_t_test(&s).unwrap();
        let b = paired_t_test(&s.swapped()).unwrap();
        assert_eq!(a.t, -b.t);
        assert_eq!(a.p, b.p);
    }

    #[test]
    fn t_test_needs_two_pairs() {
        assert_eq!(
            paired_t_test(&sample(&[1.0], &[2.0])),
            Err(MetricsError::TooFew { needed: 2, got: 1 })
        );
    }

    #[test]
    fn single_nonzero_pair_has_exact_unit_p() {
        let w = wilcoxon_signed_rank(&sample(&[5.0, 1.0], &[3.0, 1.0]));
        assert_eq!(w.n, 1);
        assert_eq!(w.p, 1.0);
        assert!(w.exact);
    }

    #[test]
    fn mid_ranks_share_tied_positions() {
        let (ranks, ties) = mid_ranks(&[2.0, 1.0, 2.0, 3.0]);
        assert_eq!(ranks, vec![2.5, 1.0, 2.5, 4.0]);
        assert_eq!(ties, vec![1, 2, 1]);
    }

    #[test]
    fn all_positive_small_sample_exact_tail() {
        // n = 5, all positive: W = 0, P(W+ <= 0) = 1/32, p = 1/16.
        let w = wilcoxon_signed_rank(&sample(&[2.0, 3.0, 4.0, 5.0, 6.0], &[1.0; 5]));
        assert_eq!(w.statistic, 0.0);
        assert!((w.p - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let p: Vec<f64> = (0..30).map(|i| i as f64 + 0.5 * (i % 3) as f64).collect();
        let t: Vec<f64> = (0..30).map(|i| i as f64 + 0.4 * (i % 5) as f64).collect();
        let w = wilcoxon_signed_rank(&sample(&p, &t));
        assert!(!w.exact);
        assert!(w.p > 0.0 && w.p <= 1.0);
    }
}
