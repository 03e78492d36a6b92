use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Pooled sizes up to this use the exact permutation distribution.
pub const EXACT_MAX_POOLED: usize = 16;
pub const MIN_SAMPLE: usize = 3;

/// Outcome for the first sample under minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Win,
    Loss,
    Tie,
}

impl Decision {
    pub fn flipped(self) -> Self {
        match self {
            Decision::Win => Decision::Loss,
            Decision::Loss => Decision::Win,
            Decision::Tie => Decision::Tie,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Win => "WIN",
            Decision::Loss => "LOSS",
            Decision::Tie => "TIE",
        })
    }
}

/// Which branch produced the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Normal,
    /// Every pooled value equal.
    Degenerate,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Normal => "normal",
            Method::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    pub p_value: f64,
    pub decision: Decision,
    pub method: Method,
    /// Rank sum of the first sample (midranks).
    pub rank_sum: f64,
}

/// Ranks starting at 1, tied values sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sided exact p-value from doubled (integer) midranks: the share of
/// size-`n` subsets whose doubled rank sum lies at least as far from its
/// mean as the observed one.
fn exact_p_value(doubled: &[u64], n: usize, observed: u64) -> f64 {
    let total_rank: u64 = doubled.iter().sum();
    let max_sum = total_rank as usize;
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0u64; max_sum + 1]; n + 1];
    counts[0][0] = 1;
    for &d in doubled {
        let d = d as usize;
        for k in (1..=n).rev() {
            for s in (d..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - d];
            }
        }
    }
    let pooled = doubled.len() as u64;
    // null mean of the doubled rank sum: 2 * n (N + 1) / 2
    let mean2 = n as i128 * (pooled as i128 + 1);
    let dev = |s: u64| (s as i128 - mean2).abs();
    let observed_dev = dev(observed);
    let (mut extreme, mut all) = (0u64, 0u64);
    for (s, &c) in counts[n].iter().enumerate() {
        all += c;
        if dev(s as u64) >= observed_dev {
            extreme += c;
        }
    }
    extreme as f64 / all as f64
}

fn normal_p_value(ranks: &[f64], n: usize, m: usize, rank_sum: f64) -> f64 {
    let big_n = (n + m) as f64;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    let mean = n as f64 * (big_n + 1.0) / 2.0;
    let var = n as f64 * m as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((rank_sum - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.sf(z)).min(1.0)
}

/// Two-sided Wilcoxon rank-sum test of `a` against `b` under minimization.
///
/// Exact when the pooled size is at most [`EXACT_MAX_POOLED`], otherwise the
/// tie-corrected normal approximation with continuity correction. The
/// decision is `Win` when significant at `alpha` and `a` has the lower
/// median, `Loss` when significant the other way, `Tie` otherwise.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumResult> {
    if a.len() < MIN_SAMPLE || b.len() < MIN_SAMPLE {
        return Err(Error::usage(format!(
            "rank-sum test needs at least {MIN_SAMPLE} values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::usage("rank-sum test received NaN"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(RankSumResult {
            p_value: 1.0,
            decision: Decision::Tie,
            method: Method::Degenerate,
            rank_sum,
        });
    }
    let (p_value, method) = if pooled.len() <= EXACT_MAX_POOLED {
        let doubled: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
        let observed: u64 = doubled[..a.len()].iter().sum();
        (exact_p_value(&doubled, a.len(), observed), Method::Exact)
    } else {
        (normal_p_value(&ranks, a.len(), b.len(), rank_sum), Method::Normal)
    };
    let (ma, mb) = (median(a), median(b));
    let decision = if p_value < alpha && ma < mb {
        Decision::Win
    } else if p_value < alpha && ma > mb {
        Decision::Loss
    } else {
        Decision::Tie
    };
    Ok(RankSumResult {
        p_value,
        decision,
        method,
        rank_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midranks_share_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn fully_separated_triples() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 0.05).unwrap();
        assert_eq!(r.method, Method::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-15);
        assert_eq!(r.decision, Decision::Tie);
    }

    #[test]
    fn fully_separated_octets() {
        let a: Vec<f64> = (1..=8).map(f64::from).collect();
        let b: Vec<f64> = (9..=16).map(f64::from).collect();
        let r = wilcoxon_rank_sum(&a, &b, 0.05).unwrap();
        assert_eq!(r.p_value, 2.0 / 12870.0);
        assert_eq!(r.decision, Decision::Win);
        assert_eq!(wilcoxon_rank_sum(&b, &a, 0.05).unwrap().decision, Decision::Loss);
    }

    #[test]
    fn identical_samples_tie() {
        let a = [1.0, 5.0, 2.0, 8.0];
        let r = wilcoxon_rank_sum(&a, &a, 0.05).unwrap();
        assert_eq!((r.p_value, r.decision), (1.0, Decision::Tie));
        let r = wilcoxon_rank_sum(&[2.0; 4], &[2.0; 5], 0.05).unwrap();
        assert_eq!((r.p_value, r.method), (1.0, Method::Degenerate));
    }

    #[test]
    fn too_small_or_nan_rejected() {
        assert!(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0, 5.0], 0.05).is_err());
        assert!(wilcoxon_rank_sum(&[1.0, 2.0, f64::NAN], &[3.0, 4.0, 5.0], 0.05).is_err());
    }

    #[test]
    fn normal_branch_for_large_samples() {
        let a: Vec<f64> = (0..25).map(|k| k as f64).collect();
        let b: Vec<f64> = (0..25).map(|k| k as f64 + 30.0).collect();
        let r = wilcoxon_rank_sum(&a, &b, 0.05).unwrap();
        assert_eq!(r.method, Method::Normal);
        assert!(r.p_value < 1e-6);
        assert_eq!(r.decision, Decision::Win);
    }

    #[test]
    fn p_value_monotone_on_a_shift_ladder() {
        let a: Vec<f64> = vec![0.3, 1.1, 2.7, 3.2, 4.9, 5.4, 6.8, 7.5, 8.1, 9.6];
        for n_pool in [6usize, 20] {
            let a = &a[..n_pool / 2];
            let mut last = f64::INFINITY;
            for step in 0..30 {
                let b: Vec<f64> = a.iter().map(|v| v + 0.5 * step as f64).collect();
                let p = wilcoxon_rank_sum(a, &b, 0.05).unwrap().p_value;
                assert!(p <= last + 1e-15, "step {step}: {p} > {last}");
                last = p;
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_under_swap(
            a in prop::collection::vec(0i32..20, 3..12),
            b in prop::collection::vec(0i32..20, 3..12),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ab = wilcoxon_rank_sum(&a, &b, 0.05).unwrap();
            let ba = wilcoxon_rank_sum(&b, &a, 0.05).unwrap();
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert_eq!(ab.decision, ba.decision.flipped());
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
        }
    }
}
