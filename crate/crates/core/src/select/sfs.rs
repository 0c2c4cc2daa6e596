//! Sequential forward selection guided by a precomputed feature ranking
//! (Relief-F in the stock pipeline) and scored by cross-validated
//! accuracy.

use rayon::prelude::*;

use crate::dataset::FeatureTable;
use crate::error::{Error, Result};
use crate::eval::{cross_validate, FoldPlan};
use crate::learn::LearnerSpec;

use super::SelectionResult;

/// Grow a feature subset greedily: at each step add the candidate with
/// the best mean CV accuracy (ties go to the better-ranked feature),
/// then return the trace prefix with the global maximum.
///
/// `ranking` must order all feature indices; the candidate pool is its
/// first `top_r` entries (all when None); `max_size` caps the subset.
pub fn sfs(
    table: &FeatureTable,
    ranking: &[usize],
    learner: &LearnerSpec,
    plan: &FoldPlan,
    max_size: Option<usize>,
    top_r: Option<usize>,
) -> Result<SelectionResult> {
    let d = table.num_features();
    {
        let mut check: Vec<usize> = ranking.to_vec();
        check.sort_unstable();
        if check != (0..d).collect::<Vec<_>>() {
            return Err(Error::InvalidInput(
                "ranking must be a permutation of all feature indices".into(),
            ));
        }
    }
    let pool: Vec<usize> = ranking[..top_r.unwrap_or(d).min(d)].to_vec();
    let max_size = max_size.unwrap_or(d).min(pool.len()).max(1);
    let rank_of = |feature: usize| ranking.iter().position(|&f| f == feature).unwrap();

    let mut selected: Vec<usize> = Vec::new();
    let mut trace: Vec<(f64, f64)> = Vec::new();

    while selected.len() < max_size {
        let remaining: Vec<usize> =
            pool.iter().copied().filter(|f| !selected.contains(f)).collect();
        if remaining.is_empty() {
            break;
        }
        let scored: Vec<Result<(usize, f64)>> = remaining
            .par_iter()
            .map(|&candidate| {
                let mut mask = vec![false; d];
                for &f in &selected {
                    mask[f] = true;
                }
                mask[candidate] = true;
                let report = cross_validate(learner, table, plan, Some(&mask))?;
                Ok((candidate, report.accuracy.mean))
            })
            .collect();

        let mut best: Option<(usize, f64)> = None;
        for s in scored {
            let (candidate, score) = s?;
            let better = match best {
                None => true,
                Some((b_candidate, b_score)) => {
                    score > b_score
                        || (score == b_score && rank_of(candidate) < rank_of(b_candidate))
                }
            };
            if better {
                best = Some((candidate, score));
            }
        }
        let (winner, score) = best.expect("non-empty candidate set");
        selected.push(winner);
        trace.push((selected.len() as f64, score));
    }

    // Best prefix: first global maximum of the trace.
    let best_step = trace
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("non-empty trace");
    let kept = &selected[..=best_step];

    let mut mask = vec![false; d];
    let mut scores = vec![0.0; d];
    for (step, &f) in selected.iter().enumerate() {
        scores[f] = trace[step].1;
    }
    for &f in kept {
        mask[f] = true;
    }

    Ok(SelectionResult {
        method: format!("sfs({})", learner.algorithm.name()),
        seed: learner.seed,
        mask,
        scores,
        trace,
        flags: vec![],
    })
}
