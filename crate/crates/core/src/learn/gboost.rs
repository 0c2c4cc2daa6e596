//! Gradient boosting with logistic loss: forward stage-wise regression
//! trees on the negative gradient (residual y - p), leaf values by one
//! Newton step, shrunk by the learning rate (Friedman 2001).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::logreg::sigmoid;
use super::member_seed;
use super::tree::{fit_regression, normalize, RegNode, RegParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GBoostModel {
    /// Log-odds of the training base rate.
    pub f0: f64,
    pub learning_rate: f64,
    pub stages: Vec<RegNode>,
    pub num_features: usize,
    importance_raw: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub min_split: usize,
    pub min_leaf: usize,
}

impl Default for GBoostParams {
    fn default() -> Self {
        GBoostParams {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            subsample: 1.0,
            min_split: 2,
            min_leaf: 1,
        }
    }
}

pub fn gboost_fit(
    x: &[Vec<f64>],
    y: &[u8],
    params: &GBoostParams,
    seed: u64,
) -> Result<GBoostModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput("empty or mismatched training data".into()));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::InvalidInput("subsample must lie in (0, 1]".into()));
    }
    let n = x.len();
    let d = x[0].len();
    let pos_rate = (y.iter().filter(|&&l| l == 1).count() as f64 / n as f64).clamp(1e-10, 1.0 - 1e-10);
    let f0 = (pos_rate / (1.0 - pos_rate)).ln();

    let mut scores = vec![f0; n];
    let mut stages = Vec::with_capacity(params.n_estimators);
    let mut importance_raw = vec![0.0; d];
    let reg_params = RegParams {
        max_depth: params.max_depth,
        min_split: params.min_split,
        min_leaf: params.min_leaf,
    };
    let sample_size = ((params.subsample * n as f64).floor() as usize).clamp(1, n);

    for stage in 0..params.n_estimators {
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        for i in 0..n {
            let p = sigmoid(scores[i]);
            grad[i] = y[i] as f64 - p; // negative gradient of logistic loss
            hess[i] = (p * (1.0 - p)).max(1e-10);
        }

        let rows: Vec<usize> = if sample_size == n {
            (0..n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed(seed, stage));
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            let mut chosen = all[..sample_size].to_vec();
            chosen.sort_unstable();
            chosen
        };

        let tree = fit_regression(x, &grad, &hess, &rows, &reg_params, Some(&mut importance_raw));
        for i in 0..n {
            scores[i] += params.learning_rate * tree.predict_row(&x[i]);
        }
        stages.push(tree);
    }

    Ok(GBoostModel {
        f0,
        learning_rate: params.learning_rate,
        stages,
        num_features: d,
        importance_raw,
    })
}

impl GBoostModel {
    /// Additive log-odds score `F(x)`.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.f0
            + self.learning_rate
                * self.stages.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.score_row(row) > 0.0)
    }

    pub fn importances(&self) -> Vec<f64> {
        normalize(&self.importance_raw)
    }

    /// Mean logistic loss of the model on a dataset.
    pub fn logistic_loss(&self, x: &[Vec<f64>], y: &[u8]) -> f64 {
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let p = sigmoid(self.score_row(row)).clamp(1e-12, 1.0 - 1e-12);
            loss -= if label == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        loss / x.len() as f64
    }
}
