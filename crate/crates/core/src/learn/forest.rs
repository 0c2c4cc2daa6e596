//! Random forest: bagged Gini trees with per-split feature subsampling
//! and majority voting. Member seeds derive from (seed, tree index) so
//! parallel training is schedule-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classification, normalize, ClassificationTree, Criterion, TreeParams};
use super::{member_seed, MaxFeatures};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<ClassificationTree>,
    pub num_features: usize,
}

#[derive(Debug, Clone)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: None,
            min_split: 2,
            min_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

pub fn forest_fit(
    x: &[Vec<f64>],
    y: &[u8],
    weights: Option<&[f64]>,
    params: &ForestParams,
    seed: u64,
) -> ForestModel {
    let n = x.len();
    let tree_params = TreeParams {
        criterion: Criterion::Gini,
        max_depth: params.max_depth,
        min_split: params.min_split,
        min_leaf: params.min_leaf,
        ccp_alpha: 0.0,
        max_features: params.max_features,
    };

    let trees: Vec<ClassificationTree> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed(seed, t));
            if params.bootstrap {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let bx: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
                let by: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
                let bw: Option<Vec<f64>> = weights.map(|w| idx.iter().map(|&i| w[i]).collect());
                fit_classification(&bx, &by, bw.as_deref(), &tree_params, Some(&mut rng))
            } else {
                fit_classification(x, y, weights, &tree_params, Some(&mut rng))
            }
        })
        .collect();

    ForestModel { trees, num_features: x[0].len() }
}

impl ForestModel {
    /// Fraction of trees voting for the positive class.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| t.predict_row(row) as usize).sum();
        votes as f64 / self.trees.len() as f64
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.score_row(row) > 0.5)
    }

    /// Total impurity decrease across all trees, normalized to sum 1.
    pub fn importances(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_features];
        for tree in &self.trees {
            for (a, v) in acc.iter_mut().zip(&tree.importance_raw) {
                *a += v;
            }
        }
        normalize(&acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn moons(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let t: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let noise = || -> f64 { 0.0 };
            let (px, py) = if label == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            x.push(vec![
                px + noise() + rng.random_range(-0.15..0.15),
                py + rng.random_range(-0.15..0.15),
            ]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn single_unbagged_full_feature_forest_equals_tree() {
        let (x, y) = moons(80, 1);
        let params = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..Default::default()
        };
        let forest = forest_fit(&x, &y, None, &params, 7);
        let tree = fit_classification(&x, &y, None, &TreeParams::default(), None);
        for row in &x {
            assert_eq!(forest.predict_row(row), tree.predict_row(row));
        }
    }

    #[test]
    fn vote_fraction_thresholding_reproduces_predict() {
        let (x, y) = moons(60, 2);
        let forest = forest_fit(&x, &y, None, &ForestParams::default(), 3);
        for row in &x {
            let s = forest.score_row(row);
            assert!((0.0..=1.0).contains(&s));
            assert_eq!(forest.predict_row(row), u8::from(s > 0.5));
        }
    }

    #[test]
    fn forest_beats_single_tree_on_most_seeds() {
        // Paired-seed oracle on noisy two-moons test splits.
        let mut wins = 0;
        let trials = 10;
        for seed in 0..trials {
            let (x, y) = moons(500, 100 + seed);
            let (train_x, test_x) = x.split_at(350);
            let (train_y, test_y) = y.split_at(350);
            let accuracy = |preds: Vec<u8>| -> f64 {
                preds.iter().zip(test_y).filter(|(a, b)| *a == *b).count() as f64
                    / test_y.len() as f64
            };
            let deep = TreeParams { max_depth: None, ..TreeParams::default() };
            let tree = fit_classification(train_x, train_y, None, &deep, None);
            let forest = forest_fit(
                train_x,
                train_y,
                None,
                &ForestParams { n_estimators: 60, ..Default::default() },
                seed,
            );
            let tree_acc = accuracy(test_x.iter().map(|r| tree.predict_row(r)).collect());
            let forest_acc = accuracy(test_x.iter().map(|r| forest.predict_row(r)).collect());
            if forest_acc >= tree_acc {
                wins += 1;
            }
        }
        assert!(wins * 10 >= trials * 9, "forest won only {wins}/{trials}");
    }

    #[test]
    fn importances_sum_to_one() {
        let (x, y) = moons(100, 4);
        let forest = forest_fit(&x, &y, None, &ForestParams::default(), 5);
        let sum: f64 = forest.importances().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "importance sum {sum}");
    }

    #[test]
    fn fit_is_deterministic_across_runs() {
        let (x, y) = moons(80, 6);
        let a = forest_fit(&x, &y, None, &ForestParams::default(), 11);
        let b = forest_fit(&x, &y, None, &ForestParams::default(), 11);
        for row in &x {
            assert_eq!(a.score_row(row), b.score_row(row));
        }
    }
}
