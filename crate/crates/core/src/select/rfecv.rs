//! Recursive feature elimination with cross-validation: repeatedly drop
//! the least-important features (importance from a fresh fit on all
//! rows), score every visited subset size by CV accuracy, and keep the
//! best size (ties prefer fewer features).

use crate::dataset::{FeatureTable, Standardizer};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, FoldPlan};
use crate::learn::{self, LearnerSpec};

use super::SelectionResult;

pub fn rfecv(
    table: &FeatureTable,
    learner: &LearnerSpec,
    plan: &FoldPlan,
    step: usize,
) -> Result<SelectionResult> {
    if step == 0 {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let d = table.num_features();
    let mut current: Vec<usize> = (0..d).collect();
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut visited: Vec<(Vec<usize>, f64)> = Vec::new();
    // Elimination round per feature; survivors get the highest score.
    let mut elimination_round = vec![0.0; d];
    let mut round = 0.0;

    loop {
        let mut mask = vec![false; d];
        for &f in &current {
            mask[f] = true;
        }
        let report = cross_validate(learner, table, plan, Some(&mask))?;
        trace.push((current.len() as f64, report.accuracy.mean));
        visited.push((current.clone(), report.accuracy.mean));

        if current.len() == 1 {
            break;
        }

        // Importance from a fit on all current rows and columns.
        let sub = table.select_columns(&mask)?;
        let std = Standardizer::fit_all(&sub)?;
        let z = std.apply(&sub)?;
        let model = learn::fit(learner, &z.rows, &z.labels)?;
        let importances = model.importances().ok_or_else(|| Error::UnsupportedLearner {
            learner: learner.algorithm.name().into(),
            reason: "recursive elimination needs per-feature importances".into(),
        })?;

        // Drop the `step` least-important features; ties drop the higher
        // original index first.
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.sort_by(|&a, &b| {
            importances[a]
                .total_cmp(&importances[b])
                .then(current[b].cmp(&current[a]))
        });
        round += 1.0;
        let drop_count = step.min(current.len() - 1);
        let dropped: Vec<usize> = order[..drop_count].iter().map(|&i| current[i]).collect();
        for &f in &dropped {
            elimination_round[f] = round;
        }
        current.retain(|f| !dropped.contains(f));
    }

    // Highest CV accuracy; ties prefer the smaller subset. The scan runs
    // from the largest visited size downward, so `>=` keeps the smallest
    // maximizer.
    let mut best_idx = 0;
    for (i, (_, score)) in visited.iter().enumerate() {
        if *score >= visited[best_idx].1 {
            best_idx = i;
        }
    }
    let (best_set, _) = &visited[best_idx];

    // Later elimination = more important; survivors top the scale.
    let max_round = round + 1.0;
    let mut scores = vec![0.0; d];
    for j in 0..d {
        scores[j] = if elimination_round[j] == 0.0 {
            max_round
        } else {
            elimination_round[j]
        };
    }
    let mut mask = vec![false; d];
    for &f in best_set {
        mask[f] = true;
    }

    Ok(SelectionResult {
        method: format!("rfecv({},step={step})", learner.algorithm.name()),
        seed: learner.seed,
        mask,
        scores,
        trace,
        flags: vec![],
    })
}
