//! Mann-Whitney U rank test, two-sided.
//!
//! Midranks for ties; exact permutation p-value for small pooled sizes,
//! otherwise a normal approximation with tie-corrected variance and
//! continuity correction.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Pooled size at or below which the p-value is computed by exact
/// enumeration of all group assignments.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct UTestResult {
    /// min(U1, U2), the reported statistic.
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    /// Rank sums of the two groups (midranks under ties).
    pub r1: f64,
    pub r2: f64,
    pub n1: usize,
    pub n2: usize,
    /// Two-sided p-value in (0, 1].
    pub p: f64,
}

pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<UTestResult> {
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput("mann-whitney needs both groups non-empty".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rank test input".into()));
    }

    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let r2: f64 = ranks[n1..].iter().sum();
    let prod = (n1 * n2) as f64;
    let u1 = prod + (n1 * (n1 + 1)) as f64 / 2.0 - r1;
    let u2 = prod + (n2 * (n2 + 1)) as f64 / 2.0 - r2;
    let u = u1.min(u2);

    let p = if n1 + n2 <= EXACT_LIMIT {
        exact_p(&ranks, n1, u)
    } else {
        normal_p(&pooled, n1, n2, u)
    };

    Ok(UTestResult { u, u1, u2, r1, r2, n1, n2, p: p.clamp(f64::MIN_POSITIVE, 1.0) })
}

/// Ranks 1..n with ties sharing their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p: the fraction of group assignments whose min-U is
/// at least as extreme as observed, over all C(n1+n2, n1) assignments of
/// the observed pooled ranks.
fn exact_p(ranks: &[f64], n1: usize, u_obs: f64) -> f64 {
    let n = ranks.len();
    let prod = (n1 * (n - n1)) as f64;
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let mut count = 0usize;
    let mut total = 0usize;

    // Iterate all n1-combinations of indices with the classic odometer.
    let mut comb: Vec<usize> = (0..n1).collect();
    loop {
        let r1: f64 = comb.iter().map(|&i| ranks[i]).sum();
        let u1 = prod + offset - r1;
        let u2 = prod - u1;
        if u1.min(u2) <= u_obs + 1e-9 {
            count += 1;
        }
        total += 1;

        // Advance.
        let mut i = n1;
        loop {
            if i == 0 {
                return count as f64 / total as f64;
            }
            i -= 1;
            if comb[i] != i + n - n1 {
                break;
            }
        }
        comb[i] += 1;
        for j in i + 1..n1 {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

fn normal_p(pooled: &[f64], n1: usize, n2: usize, u: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let prod = (n1 * n2) as f64;
    let mu = prod / 2.0;

    // Tie correction: sum of t^3 - t over tie groups.
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    let var = prod / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0; // every value tied
    }
    let z = (u - mu + 0.5) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * normal.cdf(z)).min(1.0)
}
