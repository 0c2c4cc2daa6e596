//! Group-wise k-fold evaluation: fold planning that keeps every speaker
//! inside a single fold, confusion-matrix metrics with Student-t
//! confidence intervals, ROC/AUC, and randomized hyperparameter search.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{FeatureTable, Standardizer};
use crate::error::{Error, Result};
use crate::learn::{
    self, Algorithm, Criterion, GammaSpec, KnnWeights, LearnerSpec, MaxFeatures, SvmKernel,
};

/// Assignment of every group (speaker) to exactly one fold.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub assignment: BTreeMap<String, usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_of(&self, group: &str) -> Option<usize> {
        self.assignment.get(group).copied()
    }

    /// Row mask of the test rows of `fold`.
    pub fn test_mask(&self, table: &FeatureTable, fold: usize) -> Vec<bool> {
        table
            .groups
            .iter()
            .map(|g| self.assignment.get(g) == Some(&fold))
            .collect()
    }
}

/// Shuffle groups by seed and deal them out greedily so every fold gets
/// a near-equal number of groups of each class.
pub fn group_kfold(groups: &[String], labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if groups.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: groups.len(), got: labels.len() });
    }
    // Distinct groups in first-appearance order, with their labels.
    let mut distinct: Vec<(String, u8)> = Vec::new();
    for (g, &l) in groups.iter().zip(labels) {
        match distinct.iter().find(|(dg, _)| dg == g) {
            Some((_, dl)) if *dl != l => {
                return Err(Error::Schema(format!("group {g} has conflicting labels")))
            }
            Some(_) => {}
            None => distinct.push((g.clone(), l)),
        }
    }
    if k < 2 || distinct.len() < k {
        return Err(Error::InvalidInput(format!(
            "need at least k={k} groups, have {}",
            distinct.len()
        )));
    }

    let mut assignment = BTreeMap::new();
    let mut class_counts = vec![[0usize; 2]; k];
    let mut totals = vec![0usize; k];
    for class in [0u8, 1u8] {
        let mut members: Vec<&String> = distinct
            .iter()
            .filter(|(_, l)| *l == class)
            .map(|(g, _)| g)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (class as u64 + 1));
        members.shuffle(&mut rng);
        for g in members {
            let fold = (0..k)
                .min_by_key(|&f| (class_counts[f][class as usize], totals[f], f))
                .expect("k >= 2");
            assignment.insert(g.clone(), fold);
            class_counts[fold][class as usize] += 1;
            totals[fold] += 1;
        }
    }
    Ok(FoldPlan { assignment, k, seed })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(predictions: &[u8], labels: &[u8]) -> ConfusionMatrix {
        let mut cm = ConfusionMatrix::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            match (l, p) {
                (1, 1) => cm.tp += 1,
                (1, 0) => cm.fn_ += 1,
                (0, 1) => cm.fp += 1,
                _ => cm.tn += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Confusion-matrix metrics. Degenerate ratios (zero denominators)
/// report 0 and raise the corresponding flag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub flags: Vec<String>,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::InvalidInput("empty confusion matrix".into()));
    }
    let mut m = Metrics::default();
    let ratio = |num: usize, den: usize, name: &str, flags: &mut Vec<String>| -> f64 {
        if den == 0 {
            flags.push(format!("undefined_{name}"));
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    m.accuracy = (cm.tp + cm.tn) as f64 / cm.total() as f64;
    m.precision = ratio(cm.tp, cm.tp + cm.fp, "precision", &mut m.flags);
    m.recall = ratio(cm.tp, cm.tp + cm.fn_, "recall", &mut m.flags);
    m.specificity = ratio(cm.tn, cm.tn + cm.fp, "specificity", &mut m.flags);
    m.f1 = if m.precision + m.recall > 0.0 {
        2.0 * m.precision * m.recall / (m.precision + m.recall)
    } else {
        m.flags.push("undefined_f1".into());
        0.0
    };
    Ok(m)
}

/// ROC curve by descending-score sweep with tied scores grouped, plus
/// the trapezoidal area. The tie-grouped sweep makes the area equal to
/// the rank-statistic (Mann-Whitney) formulation.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<(f64, Vec<(f64, f64)>)> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidInput("scores/labels mismatch".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput("ROC needs both classes".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut auc = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut last_tpr, mut last_fpr) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < order.len() {
        // Consume the whole tie group at once.
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let tpr = tp as f64 / pos as f64;
        let fpr = fp as f64 / neg as f64;
        auc += (fpr - last_fpr) * (tpr + last_tpr) / 2.0;
        points.push((fpr, tpr));
        last_tpr = tpr;
        last_fpr = fpr;
        i = j + 1;
    }
    Ok((auc, points))
}

#[derive(Debug, Clone, Default)]
pub struct FoldReport {
    pub fold: usize,
    pub cm: ConfusionMatrix,
    pub metrics: Metrics,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetricSummary {
    pub mean: f64,
    /// Half-width of the 95% Student-t interval over folds.
    pub ci: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub folds: Vec<FoldReport>,
    pub accuracy: MetricSummary,
    pub auc: MetricSummary,
    pub f1: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub specificity: MetricSummary,
}

fn summarize(values: &[f64]) -> MetricSummary {
    let k = values.len();
    let mean = crate::dsp::mean(values);
    if k < 2 {
        return MetricSummary { mean, ci: 0.0 };
    }
    let s = crate::dsp::std_sample(values);
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(0.975);
    MetricSummary { mean, ci: t * s / (k as f64).sqrt() }
}

/// Group-wise cross-validation: per fold, the standardizer and model
/// are fit on training rows only and evaluated on the held-out rows.
pub fn cross_validate(
    spec: &LearnerSpec,
    table: &FeatureTable,
    plan: &FoldPlan,
    mask: Option<&[bool]>,
) -> Result<EvalReport> {
    for g in &table.groups {
        if plan.fold_of(g).is_none() {
            return Err(Error::InvalidInput(format!("group {g} missing from fold plan")));
        }
    }
    let projected;
    let table = match mask {
        Some(m) => {
            projected = table.select_columns(m)?;
            &projected
        }
        None => table,
    };

    let fold_results: Vec<Result<FoldReport>> = (0..plan.k)
        .into_par_iter()
        .map(|fold| evaluate_fold(spec, table, plan, fold))
        .collect();

    let mut folds = Vec::with_capacity(plan.k);
    for r in fold_results {
        folds.push(r?);
    }

    let collect = |f: &dyn Fn(&FoldReport) -> f64| -> Vec<f64> { folds.iter().map(f).collect() };
    Ok(EvalReport {
        accuracy: summarize(&collect(&|r| r.metrics.accuracy)),
        auc: summarize(&collect(&|r| r.auc)),
        f1: summarize(&collect(&|r| r.metrics.f1)),
        precision: summarize(&collect(&|r| r.metrics.precision)),
        recall: summarize(&collect(&|r| r.metrics.recall)),
        specificity: summarize(&collect(&|r| r.metrics.specificity)),
        folds,
    })
}

fn evaluate_fold(
    spec: &LearnerSpec,
    table: &FeatureTable,
    plan: &FoldPlan,
    fold: usize,
) -> Result<FoldReport> {
    let test_mask = plan.test_mask(table, fold);
    let train_mask: Vec<bool> = test_mask.iter().map(|t| !t).collect();
    let train_idx: Vec<usize> = (0..table.num_rows()).filter(|&i| train_mask[i]).collect();
    let test_idx: Vec<usize> = (0..table.num_rows()).filter(|&i| test_mask[i]).collect();
    if test_idx.is_empty() {
        return Err(Error::InvalidInput(format!("fold {fold} has no test rows")));
    }

    let train_y: Vec<u8> = train_idx.iter().map(|&i| table.labels[i]).collect();
    if train_y.iter().all(|&l| l == 0) || train_y.iter().all(|&l| l == 1) {
        return Err(Error::InvalidInput(format!("fold {fold}: training rows have a single class")));
    }

    let standardizer = Standardizer::fit(table, &train_mask)?;
    let train_x: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| standardizer.apply_row(&table.rows[i]))
        .collect();
    let test_x: Vec<Vec<f64>> = test_idx
        .iter()
        .map(|&i| standardizer.apply_row(&table.rows[i]))
        .collect();
    let test_y: Vec<u8> = test_idx.iter().map(|&i| table.labels[i]).collect();

    let fold_spec = LearnerSpec {
        algorithm: spec.algorithm.clone(),
        seed: spec.seed.wrapping_add(fold as u64),
    };
    let model = learn::fit(&fold_spec, &train_x, &train_y)?;
    let scores = model.decision_scores(&test_x)?;
    let predictions = model.predict(&test_x)?;

    let cm = ConfusionMatrix::from_predictions(&predictions, &test_y);
    let m = metrics(&cm)?;
    let mut flags = m.flags.clone();
    let (auc, roc) = match roc_auc(&scores, &test_y) {
        Ok(pair) => pair,
        Err(_) => {
            flags.push("degenerate_roc".into());
            (0.5, vec![(0.0, 0.0), (1.0, 1.0)])
        }
    };
    Ok(FoldReport { fold, cm, metrics: m, auc, roc, flags })
}

// ---------------------------------------------------------------------
// Randomized hyperparameter search
// ---------------------------------------------------------------------

/// A finite candidate grid sampled without replacement.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    pub candidates: Vec<Algorithm>,
    pub n_iter: usize,
    pub seed: u64,
}

pub const DEFAULT_SEARCH_ITER: usize = 60;

impl SearchSpace {
    /// The stock search grid for an algorithm tag.
    pub fn default_for(algorithm: &str, n_iter: usize, seed: u64) -> Result<SearchSpace> {
        let candidates = default_grid(algorithm)?;
        if n_iter == 0 {
            return Err(Error::InvalidInput("n_iter must be positive".into()));
        }
        Ok(SearchSpace { candidates, n_iter, seed })
    }
}

fn default_grid(algorithm: &str) -> Result<Vec<Algorithm>> {
    let mut grid = Vec::new();
    match algorithm {
        "logreg" => {
            for exp in -4..=4 {
                for max_iter in [100, 200, 500, 1000] {
                    grid.push(Algorithm::LogReg { c: 10f64.powi(exp), max_iter });
                }
            }
        }
        "forest" => {
            for n_estimators in [100, 300, 500] {
                for max_depth in [None, Some(10), Some(20), Some(50)] {
                    for min_split in [2, 5, 10] {
                        for min_leaf in [1, 2, 4] {
                            for max_features in
                                [MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All]
                            {
                                for bootstrap in [true, false] {
                                    grid.push(Algorithm::Forest {
                                        n_estimators,
                                        max_depth,
                                        min_split,
                                        min_leaf,
                                        max_features,
                                        bootstrap,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        "svm" => {
            let gammas = [
                GammaSpec::Scale,
                GammaSpec::Auto,
                GammaSpec::Value(0.001),
                GammaSpec::Value(0.01),
                GammaSpec::Value(0.1),
                GammaSpec::Value(1.0),
            ];
            for c in [0.1, 1.0, 10.0, 100.0] {
                grid.push(svm_algo(c, SvmKernel::Linear));
                for gamma in gammas {
                    grid.push(svm_algo(c, SvmKernel::Rbf { gamma }));
                    for degree in [2, 3, 4] {
                        grid.push(svm_algo(c, SvmKernel::Poly { degree, gamma }));
                    }
                }
            }
        }
        "knn" => {
            for k in [3, 5, 7, 9, 11] {
                for weights in [KnnWeights::Uniform, KnnWeights::Distance] {
                    for p in [1, 2] {
                        grid.push(Algorithm::Knn { k, weights, p });
                    }
                }
            }
        }
        "gboost" => {
            for n_estimators in [100, 200, 300] {
                for learning_rate in [0.01, 0.05, 0.1] {
                    for max_depth in [3, 5, 7] {
                        for subsample in [0.7, 0.85, 1.0] {
                            for min_split in [2, 5, 10] {
                                for min_leaf in [1, 3, 5] {
                                    grid.push(Algorithm::GBoost {
                                        n_estimators,
                                        learning_rate,
                                        max_depth,
                                        subsample,
                                        min_split,
                                        min_leaf,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        "tree" => {
            for criterion in [Criterion::Gini, Criterion::Entropy] {
                for max_depth in [None, Some(5), Some(10), Some(20)] {
                    for min_split in [2, 5, 10] {
                        for min_leaf in [1, 2, 4] {
                            for max_features in
                                [MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All]
                            {
                                for ccp_alpha in [0.0, 0.01, 0.1] {
                                    grid.push(Algorithm::Tree {
                                        criterion,
                                        max_depth,
                                        min_split,
                                        min_leaf,
                                        max_features,
                                        ccp_alpha,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        "adaboost" => {
            use crate::learn::AdaBase;
            for n_estimators in [50, 100, 200] {
                for learning_rate in [0.01, 0.1, 0.5, 1.0] {
                    for base in [
                        AdaBase::Stump,
                        AdaBase::Depth2Tree,
                        AdaBase::Forest { n_estimators: 100 },
                        AdaBase::Forest { n_estimators: 300 },
                    ] {
                        grid.push(Algorithm::AdaBoost { n_estimators, learning_rate, base });
                    }
                }
            }
        }
        other => return Err(Error::InvalidInput(format!("no search grid for {other:?}"))),
    }
    Ok(grid)
}

fn svm_algo(c: f64, kernel: SvmKernel) -> Algorithm {
    Algorithm::Svm { c, kernel, tol: 1e-3, max_passes: 200 }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: LearnerSpec,
    pub best_score: f64,
    /// (spec, mean CV accuracy) in sampling order.
    pub evaluated: Vec<(LearnerSpec, f64)>,
}

/// Evaluate `n_iter` distinct configurations sampled from the space by
/// mean cross-validated accuracy over a shared fold plan. Ties keep the
/// earliest-sampled configuration.
pub fn random_search(
    space: &SearchSpace,
    table: &FeatureTable,
    plan: &FoldPlan,
) -> Result<SearchResult> {
    if space.candidates.is_empty() {
        return Err(Error::InvalidInput("empty search space".into()));
    }
    let mut order: Vec<usize> = (0..space.candidates.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
    order.shuffle(&mut rng);
    order.truncate(space.n_iter.min(space.candidates.len()));

    let scored: Vec<Result<(LearnerSpec, f64)>> = order
        .par_iter()
        .map(|&idx| {
            let spec = LearnerSpec::new(space.candidates[idx].clone(), space.seed);
            let report = cross_validate(&spec, table, plan, None)?;
            Ok((spec, report.accuracy.mean))
        })
        .collect();

    let mut evaluated = Vec::with_capacity(scored.len());
    for s in scored {
        evaluated.push(s?);
    }
    let (best, best_score) = evaluated
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, v)| (s.clone(), *v))
        .expect("non-empty");
    Ok(SearchResult { best, best_score, evaluated })
}
