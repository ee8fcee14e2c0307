//! One-sample t, Wilcoxon signed-rank and sign tests.

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use super::{check_sample, combine_tails, Alternative, Method, TestResult};
use crate::error::{LqError, Result};
use crate::family::{mean, std_dev};

/// Largest reduced sample size for which the Wilcoxon null is enumerated.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// Classical one-sample t test against `mu0`.
///
/// `statistic` is `t` for `greater`, `-t` for `less` and `|t|` for the
/// two-sided case, with the matching Student-t quantile as critical value.
pub fn t_test(data: &[f64], mu0: f64, alt: Alternative, alpha: f64) -> Result<TestResult> {
    check_sample(data, 2)?;
    let n = data.len();
    let sd = std_dev(data);
    if !(sd > 0.0) {
        return Err(LqError::Domain("zero sample variance".into()));
    }
    let t = (mean(data) - mu0) / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df ≥ 1");
    let upper = dist.sf(t);
    let lower = dist.cdf(t);
    let p_value = combine_tails(upper, lower, alt);
    let (statistic, critical_value) = match alt {
        Alternative::Greater => (t, dist.inverse_cdf(1.0 - alpha)),
        Alternative::Less => (-t, dist.inverse_cdf(1.0 - alpha)),
        Alternative::TwoSided => (t.abs(), dist.inverse_cdf(1.0 - alpha / 2.0)),
    };
    Ok(TestResult {
        statistic,
        critical_value: Some(critical_value),
        p_value,
        reject: statistic >= critical_value,
        q_used: 1.0,
        method: Method::LrT,
        n,
        bootstrap: None,
    })
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Exact null distribution of `W+` for the given (possibly tied) ranks, as
/// probabilities indexed by `2 W+`.
fn signed_rank_null(ranks: &[f64]) -> Vec<f64> {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut dist = vec![0.0; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let mass = dist[s] * 0.5;
            dist[s] = mass;
            dist[s + r] += mass;
        }
        reach += r;
    }
    dist
}

/// `P(W+ ≥ w)` under the exact null for the given ranks.
pub fn wilcoxon_exact_upper_tail(ranks: &[f64], w: f64) -> f64 {
    let dist = signed_rank_null(ranks);
    let k = (2.0 * w - 1e-9).ceil().max(0.0) as usize;
    dist.iter().skip(k).sum::<f64>().min(1.0)
}

/// Wilcoxon signed-rank test of symmetry about `mu0`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. The
/// null is enumerated exactly for at most [`WILCOXON_EXACT_MAX_N`] non-zero
/// differences; larger samples use the tie-corrected normal approximation
/// with continuity correction.
pub fn wilcoxon_signed_rank(data: &[f64], mu0: f64, alt: Alternative, alpha: f64) -> Result<TestResult> {
    check_sample(data, 1)?;
    let diffs: Vec<f64> = data.iter().map(|x| x - mu0).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(LqError::Domain("all differences are zero".into()));
    }
    let n = diffs.len();
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total: f64 = ranks.iter().sum();

    let (upper, lower) = if n <= WILCOXON_EXACT_MAX_N {
        let dist = signed_rank_null(&ranks);
        let k = (2.0 * w).round() as usize;
        let upper: f64 = dist[k..].iter().sum();
        let lower: f64 = dist[..=k].iter().sum();
        (upper.min(1.0), lower.min(1.0))
    } else {
        let mean_w = total / 2.0;
        let mut ties = 0.0;
        let mut sorted = ranks.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut i = 0;
        while i < sorted.len() {
            let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
            let t = j as f64;
            ties += t * t * t - t;
            i += j;
        }
        let nf = n as f64;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let sd = var.sqrt();
        let norm = Normal::new(0.0, 1.0).expect("standard normal");
        let upper = norm.sf((w - mean_w - 0.5) / sd);
        let lower = norm.cdf((w - mean_w + 0.5) / sd);
        (upper, lower)
    };
    let p_value = combine_tails(upper, lower, alt);
    Ok(TestResult {
        statistic: w,
        critical_value: None,
        p_value,
        reject: p_value <= alpha,
        q_used: 1.0,
        method: Method::Wilcoxon,
        n,
        bootstrap: None,
    })
}

const EXACT_SIGN_MAX_N: u64 = 2000;

/// `Binomial(n, 1/2)` probabilities by repeated halving, exact in binary for
/// small `n`.
fn fair_binomial_pmf(n: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for m in 0..n {
        for k in (0..=m).rev() {
            let half = pmf[k] * 0.5;
            pmf[k] = half;
            pmf[k + 1] += half;
        }
    }
    pmf
}

/// Exact binomial sign test; zero differences are dropped.
pub fn sign_test(data: &[f64], mu0: f64, alt: Alternative, alpha: f64) -> Result<TestResult> {
    check_sample(data, 1)?;
    let pos = data.iter().filter(|&&x| x > mu0).count() as u64;
    let neg = data.iter().filter(|&&x| x < mu0).count() as u64;
    let n = pos + neg;
    if n == 0 {
        return Err(LqError::Domain("all differences are zero".into()));
    }
    let (upper, lower) = if n <= EXACT_SIGN_MAX_N {
        let pmf = fair_binomial_pmf(n as usize);
        let k = pos as usize;
        (pmf[k..].iter().sum::<f64>().min(1.0), pmf[..=k].iter().sum::<f64>().min(1.0))
    } else {
        let bin = Binomial::new(0.5, n).expect("valid binomial");
        let upper = if pos == 0 { 1.0 } else { bin.sf(pos - 1) };
        (upper, bin.cdf(pos))
    };
    let p_value = combine_tails(upper, lower, alt);
    Ok(TestResult {
        statistic: pos as f64,
        critical_value: None,
        p_value,
        reject: p_value <= alpha,
        q_used: 1.0,
        method: Method::Sign,
        n: n as usize,
        bootstrap: None,
    })
}
