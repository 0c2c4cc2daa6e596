//! From-scratch classifiers behind one interface: fit, binary predict,
//! continuous decision scores, and (where defined) per-feature
//! importances.
//!
//! Determinism contract: identical (seed, data, spec) produce identical
//! models; ensemble members derive their seeds from (seed, member index)
//! so parallel training is schedule-independent.

pub mod adaboost;
pub mod forest;
pub mod gboost;
pub mod knn;
pub mod logreg;
pub mod svm;
pub mod tree;

pub use adaboost::{adaboost_fit, AdaBase, AdaBoostModel, AdaBoostParams};
pub use forest::{forest_fit, ForestModel, ForestParams};
pub use gboost::{gboost_fit, GBoostModel, GBoostParams};
pub use knn::{knn_fit, KnnModel, KnnWeights};
pub use logreg::{logreg_fit, penalized_loss_grad, LogRegModel};
pub use svm::{dual_constraint_residuals, svm_fit, GammaSpec, SvmKernel, SvmModel, SvmParams};
pub use tree::{fit_classification, ClassificationTree, Criterion, TreeParams};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-split feature subsampling rule for tree learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    All,
}

/// Derive an ensemble member's seed from the model seed and member index.
pub(crate) fn member_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Algorithm tag plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Majority-class baseline.
    Dummy,
    LogReg {
        c: f64,
        max_iter: usize,
    },
    Tree {
        criterion: Criterion,
        max_depth: Option<usize>,
        min_split: usize,
        min_leaf: usize,
        max_features: MaxFeatures,
        ccp_alpha: f64,
    },
    Forest {
        n_estimators: usize,
        max_depth: Option<usize>,
        min_split: usize,
        min_leaf: usize,
        max_features: MaxFeatures,
        bootstrap: bool,
    },
    GBoost {
        n_estimators: usize,
        learning_rate: f64,
        max_depth: usize,
        subsample: f64,
        min_split: usize,
        min_leaf: usize,
    },
    AdaBoost {
        n_estimators: usize,
        learning_rate: f64,
        base: AdaBase,
    },
    Knn {
        k: usize,
        weights: KnnWeights,
        p: u32,
    },
    Svm {
        c: f64,
        kernel: SvmKernel,
        tol: f64,
        max_passes: usize,
    },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Dummy => "dummy",
            Algorithm::LogReg { .. } => "logreg",
            Algorithm::Tree { .. } => "tree",
            Algorithm::Forest { .. } => "forest",
            Algorithm::GBoost { .. } => "gboost",
            Algorithm::AdaBoost { .. } => "adaboost",
            Algorithm::Knn { .. } => "knn",
            Algorithm::Svm { .. } => "svm",
        }
    }

    /// Sensible defaults per algorithm tag.
    pub fn default_for(name: &str) -> Result<Algorithm> {
        match name {
            "dummy" => Ok(Algorithm::Dummy),
            "logreg" => Ok(Algorithm::LogReg { c: 1.0, max_iter: 100 }),
            "tree" => Ok(Algorithm::Tree {
                criterion: Criterion::Gini,
                max_depth: None,
                min_split: 2,
                min_leaf: 1,
                max_features: MaxFeatures::All,
                ccp_alpha: 0.0,
            }),
            "forest" => Ok(Algorithm::Forest {
                n_estimators: 100,
                max_depth: None,
                min_split: 2,
                min_leaf: 1,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            "gboost" => Ok(Algorithm::GBoost {
                n_estimators: 100,
                learning_rate: 0.1,
                max_depth: 3,
                subsample: 1.0,
                min_split: 2,
                min_leaf: 1,
            }),
            "adaboost" => Ok(Algorithm::AdaBoost {
                n_estimators: 50,
                learning_rate: 1.0,
                base: AdaBase::Stump,
            }),
            "knn" => Ok(Algorithm::Knn { k: 5, weights: KnnWeights::Uniform, p: 2 }),
            "svm" => Ok(Algorithm::Svm {
                c: 1.0,
                kernel: SvmKernel::Rbf { gamma: GammaSpec::Scale },
                tol: 1e-3,
                max_passes: 200,
            }),
            other => Err(Error::InvalidInput(format!("unknown learner {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> LearnerSpec {
        LearnerSpec { algorithm, seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DummyModel {
    pub majority: u8,
    pub positive_rate: f64,
}

/// Any fitted classifier. Immutable after fit; scoring is safe from
/// multiple threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedModel {
    Dummy(DummyModel),
    LogReg(LogRegModel),
    Tree(ClassificationTree),
    Forest(ForestModel),
    GBoost(GBoostModel),
    AdaBoost(AdaBoostModel),
    Knn(KnnModel),
    Svm(SvmModel),
}

pub fn fit(spec: &LearnerSpec, x: &[Vec<f64>], y: &[u8]) -> Result<FittedModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput("empty or mismatched training data".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training matrix".into()));
    }
    match &spec.algorithm {
        Algorithm::Dummy => {
            let pos = y.iter().filter(|&&l| l == 1).count();
            let neg = y.len() - pos;
            Ok(FittedModel::Dummy(DummyModel {
                majority: u8::from(pos > neg),
                positive_rate: pos as f64 / y.len() as f64,
            }))
        }
        Algorithm::LogReg { c, max_iter } => {
            Ok(FittedModel::LogReg(logreg_fit(x, y, *c, *max_iter)?))
        }
        Algorithm::Tree { criterion, max_depth, min_split, min_leaf, max_features, ccp_alpha } => {
            let params = TreeParams {
                criterion: *criterion,
                max_depth: *max_depth,
                min_split: *min_split,
                min_leaf: *min_leaf,
                ccp_alpha: *ccp_alpha,
                max_features: *max_features,
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
            let rng_opt =
                if *max_features == MaxFeatures::All { None } else { Some(&mut rng) };
            Ok(FittedModel::Tree(fit_classification(x, y, None, &params, rng_opt)))
        }
        Algorithm::Forest {
            n_estimators,
            max_depth,
            min_split,
            min_leaf,
            max_features,
            bootstrap,
        } => {
            let params = ForestParams {
                n_estimators: *n_estimators,
                max_depth: *max_depth,
                min_split: *min_split,
                min_leaf: *min_leaf,
                max_features: *max_features,
                bootstrap: *bootstrap,
            };
            Ok(FittedModel::Forest(forest_fit(x, y, None, &params, spec.seed)))
        }
        Algorithm::GBoost {
            n_estimators,
            learning_rate,
            max_depth,
            subsample,
            min_split,
            min_leaf,
        } => {
            let params = GBoostParams {
                n_estimators: *n_estimators,
                learning_rate: *learning_rate,
                max_depth: *max_depth,
                subsample: *subsample,
                min_split: *min_split,
                min_leaf: *min_leaf,
            };
            Ok(FittedModel::GBoost(gboost_fit(x, y, &params, spec.seed)?))
        }
        Algorithm::AdaBoost { n_estimators, learning_rate, base } => {
            let params = AdaBoostParams {
                n_estimators: *n_estimators,
                learning_rate: *learning_rate,
                base: *base,
            };
            Ok(FittedModel::AdaBoost(adaboost_fit(x, y, &params, spec.seed)?))
        }
        Algorithm::Knn { k, weights, p } => Ok(FittedModel::Knn(knn_fit(x, y, *k, *weights, *p)?)),
        Algorithm::Svm { c, kernel, tol, max_passes } => {
            let params = SvmParams { c: *c, kernel: *kernel, tol: *tol, max_passes: *max_passes };
            Ok(FittedModel::Svm(svm_fit(x, y, &params)?))
        }
    }
}

impl FittedModel {
    pub fn num_features(&self) -> Option<usize> {
        match self {
            FittedModel::Dummy(_) => None,
            FittedModel::LogReg(m) => Some(m.weights.len()),
            FittedModel::Tree(m) => Some(m.num_features),
            FittedModel::Forest(m) => Some(m.num_features),
            FittedModel::GBoost(m) => Some(m.num_features),
            FittedModel::AdaBoost(m) => Some(m.num_features),
            FittedModel::Knn(m) => Some(m.train_x.first().map_or(0, |r| r.len())),
            FittedModel::Svm(m) => Some(m.num_features),
        }
    }

    fn check_dims(&self, x: &[Vec<f64>]) -> Result<()> {
        if let Some(d) = self.num_features() {
            if let Some(row) = x.iter().find(|r| r.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
        }
        Ok(())
    }

    /// Continuous score per row, monotone in positive-class confidence.
    pub fn decision_scores(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        Ok(x.iter().map(|r| self.score_row(r)).collect())
    }

    pub fn score_row(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Dummy(m) => m.positive_rate,
            FittedModel::LogReg(m) => m.decision_row(row),
            FittedModel::Tree(m) => m.score_row(row),
            FittedModel::Forest(m) => m.score_row(row),
            FittedModel::GBoost(m) => m.score_row(row),
            FittedModel::AdaBoost(m) => m.score_row(row),
            FittedModel::Knn(m) => m.score_row(row),
            FittedModel::Svm(m) => m.score_row(row),
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<u8>> {
        self.check_dims(x)?;
        Ok(x.iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        match self {
            FittedModel::Dummy(m) => m.majority,
            FittedModel::LogReg(m) => u8::from(m.decision_row(row) > 0.0),
            FittedModel::Tree(m) => m.predict_row(row),
            FittedModel::Forest(m) => m.predict_row(row),
            FittedModel::GBoost(m) => m.predict_row(row),
            FittedModel::AdaBoost(m) => m.predict_row(row),
            FittedModel::Knn(m) => m.predict_row(row),
            FittedModel::Svm(m) => m.predict_row(row),
        }
    }

    /// Per-feature importances where the algorithm defines them:
    /// |theta| for logistic regression, impurity/gain accumulations for
    /// the tree ensembles. None for knn, svm, and the dummy baseline.
    pub fn importances(&self) -> Option<Vec<f64>> {
        match self {
            FittedModel::LogReg(m) => Some(m.weights.iter().map(|w| w.abs()).collect()),
            FittedModel::Tree(m) => Some(m.importances()),
            FittedModel::Forest(m) => Some(m.importances()),
            FittedModel::GBoost(m) => Some(m.importances()),
            FittedModel::AdaBoost(m) => Some(m.importances()),
            FittedModel::Dummy(_) | FittedModel::Knn(_) | FittedModel::Svm(_) => None,
        }
    }

    /// Serialize to a self-contained JSON document.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<FittedModel> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let c = if label == 1 { 1.5 } else { -1.5 };
            x.push(vec![c + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn dummy_predicts_majority_with_tie_to_negative() {
        let (x, _) = blobs(10, 1);
        let y = vec![1, 1, 1, 0, 0, 0, 0, 1, 0, 1]; // 5/5 tie
        let m = fit(&LearnerSpec::new(Algorithm::Dummy, 0), &x, &y).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![0; 10]);
        assert_eq!(m.score_row(&x[0]), 0.5);
    }

    #[test]
    fn every_algorithm_fits_predicts_and_roundtrips_json() {
        let (x, y) = blobs(40, 2);
        for name in ["dummy", "logreg", "tree", "forest", "gboost", "adaboost", "knn", "svm"] {
            let spec = LearnerSpec::new(Algorithm::default_for(name).unwrap(), 5);
            let m = fit(&spec, &x, &y).unwrap();
            let scores = m.decision_scores(&x).unwrap();
            let preds = m.predict(&x).unwrap();
            assert_eq!(scores.len(), 40);
            assert!(preds.iter().all(|&p| p <= 1));

            let json = m.to_json().unwrap();
            let back = FittedModel::from_json(&json).unwrap();
            assert_eq!(back.decision_scores(&x).unwrap(), scores, "{name} roundtrip");
            assert_eq!(back.predict(&x).unwrap(), preds);
        }
    }

    #[test]
    fn logreg_threshold_equivalence() {
        let (x, y) = blobs(60, 3);
        let spec = LearnerSpec::new(Algorithm::default_for("logreg").unwrap(), 0);
        let m = fit(&spec, &x, &y).unwrap();
        if let FittedModel::LogReg(lr) = &m {
            for row in &x {
                let by_score = u8::from(lr.decision_row(row) > 0.0);
                let by_prob = u8::from(lr.probability_row(row) > 0.5);
                assert_eq!(by_score, by_prob);
            }
        } else {
            panic!("expected logreg");
        }
    }

    #[test]
    fn importances_defined_exactly_where_specified() {
        let (x, y) = blobs(30, 4);
        let has = |name: &str| -> bool {
            let spec = LearnerSpec::new(Algorithm::default_for(name).unwrap(), 1);
            fit(&spec, &x, &y).unwrap().importances().is_some()
        };
        assert!(has("logreg"));
        assert!(has("tree"));
        assert!(has("forest"));
        assert!(has("gboost"));
        assert!(has("adaboost"));
        assert!(!has("knn"));
        assert!(!has("svm"));
        assert!(!has("dummy"));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let (x, y) = blobs(20, 5);
        let spec = LearnerSpec::new(Algorithm::default_for("tree").unwrap(), 0);
        let m = fit(&spec, &x, &y).unwrap();
        let bad = vec![vec![1.0, 2.0, 3.0]];
        assert!(matches!(m.predict(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fits_are_deterministic_per_seed() {
        let (x, y) = blobs(50, 6);
        for name in ["forest", "gboost", "adaboost", "svm"] {
            let spec = LearnerSpec::new(Algorithm::default_for(name).unwrap(), 42);
            let a = fit(&spec, &x, &y).unwrap().decision_scores(&x).unwrap();
            let b = fit(&spec, &x, &y).unwrap().decision_scores(&x).unwrap();
            assert_eq!(a, b, "{name} must be deterministic");
        }
    }
}
