//! Relief-F feature weighting (Kononenko 1994): for sampled instances,
//! weights drop by the feature difference to the k nearest hits and grow
//! by the prior-weighted difference to the k nearest misses of each
//! opposite class. Differences are on min-max scaled features, averaged
//! over k and normalized by the number of sampled instances.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReliefState {
    pub weights: Vec<f64>,
    pub k_neighbors: usize,
    pub m_iterations: usize,
    /// Class priors P(c) for c in {0, 1}.
    pub class_priors: [f64; 2],
    pub flags: Vec<String>,
}

impl ReliefState {
    /// Feature indices sorted by descending weight (ties by lower index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.weights.len()).collect();
        order.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        order
    }
}

/// Run Relief-F over `m` sampled instances (all rows when None, in row
/// order, which makes the result independent of the seed).
pub fn relieff(table: &FeatureTable, k: usize, m: Option<usize>, seed: u64) -> Result<ReliefState> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let n = table.num_rows();
    let d = table.num_features();
    let n_pos = table.labels.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput("relief-f needs both classes".into()));
    }
    let priors = [n_neg as f64 / n as f64, n_pos as f64 / n as f64];

    // Min-max scale columns; constant columns contribute zero diff.
    let mut scaled = table.rows.clone();
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &table.rows {
            lo = lo.min(row[j]);
            hi = hi.max(row[j]);
        }
        let range = hi - lo;
        for row in scaled.iter_mut() {
            row[j] = if range > 0.0 { (row[j] - lo) / range } else { 0.0 };
        }
    }

    let sampled: Vec<usize> = match m {
        Some(m) if m < n => {
            let mut all: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.shuffle(&mut rng);
            all.truncate(m);
            all
        }
        _ => (0..n).collect(),
    };
    let m_count = sampled.len();

    let mut flags = Vec::new();
    if n_pos < k + 1 || n_neg < k + 1 {
        flags.push(format!(
            "k_reduced_to_available(pos={},neg={})",
            n_pos.saturating_sub(1).min(k),
            n_neg.saturating_sub(1).min(k)
        ));
    }

    let mut weights = vec![0.0; d];
    for &i in &sampled {
        let own_class = table.labels[i];
        // Manhattan distances to every other row on scaled features.
        let mut hits: Vec<(f64, usize)> = Vec::new();
        let mut misses: Vec<(f64, usize)> = Vec::new();
        for other in 0..n {
            if other == i {
                continue;
            }
            let dist: f64 = scaled[i]
                .iter()
                .zip(&scaled[other])
                .map(|(a, b)| (a - b).abs())
                .sum();
            if table.labels[other] == own_class {
                hits.push((dist, other));
            } else {
                misses.push((dist, other));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        misses.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k_hit = k.min(hits.len());
        let k_miss = k.min(misses.len());
        if k_hit == 0 || k_miss == 0 {
            continue;
        }

        // Binary case: the miss prior ratio P(c)/(1 - P(class(x)))
        // reduces to 1; written out for the general shape.
        let miss_ratio =
            priors[1 - own_class as usize] / (1.0 - priors[own_class as usize]);
        for j in 0..d {
            let hit_diff: f64 = hits[..k_hit]
                .iter()
                .map(|&(_, h)| (scaled[i][j] - scaled[h][j]).abs())
                .sum::<f64>()
                / k_hit as f64;
            let miss_diff: f64 = misses[..k_miss]
                .iter()
                .map(|&(_, mi)| (scaled[i][j] - scaled[mi][j]).abs())
                .sum::<f64>()
                / k_miss as f64;
            weights[j] += (miss_ratio * miss_diff - hit_diff) / m_count as f64;
        }
    }

    Ok(ReliefState {
        weights,
        k_neighbors: k,
        m_iterations: m_count,
        class_priors: priors,
        flags,
    })
}
