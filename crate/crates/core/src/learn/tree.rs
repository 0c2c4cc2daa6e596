//! CART decision trees: a weighted classification tree on Gini or
//! entropy impurity, and a lighter regression tree used as the boosting
//! base learner.
//!
//! Split search is exhaustive over features and midpoint thresholds;
//! ties resolve to the lowest feature index, then the lowest threshold,
//! so fits are reproducible.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MaxFeatures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, counts: &[f64; 2]) -> f64 {
        let total = counts[0] + counts[1];
        if total <= 0.0 {
            return 0.0;
        }
        let p0 = counts[0] / total;
        let p1 = counts[1] / total;
        match self {
            Criterion::Gini => 1.0 - p0 * p0 - p1 * p1,
            Criterion::Entropy => {
                let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
                term(p0) + term(p1)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Weighted class counts at the leaf.
        counts: [f64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn leaf_counts(&self, row: &[f64]) -> &[f64; 2] {
        match self {
            Node::Leaf { counts } => counts,
            Node::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    left.leaf_counts(row)
                } else {
                    right.leaf_counts(row)
                }
            }
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub min_leaf: usize,
    pub ccp_alpha: f64,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            max_depth: None,
            min_split: 2,
            min_leaf: 1,
            ccp_alpha: 0.0,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationTree {
    pub root: Node,
    pub num_features: usize,
    /// Unnormalized impurity-decrease accumulation per feature.
    pub importance_raw: Vec<f64>,
}

impl ClassificationTree {
    /// Positive-class probability at the reached leaf.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let counts = self.root.leaf_counts(row);
        let total = counts[0] + counts[1];
        if total <= 0.0 {
            0.5
        } else {
            counts[1] / total
        }
    }

    /// Majority class at the leaf (tie goes to class 0).
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.score_row(row) > 0.5)
    }

    /// Impurity-decrease importances normalized to sum 1 (all zeros for
    /// a stump that never split).
    pub fn importances(&self) -> Vec<f64> {
        normalize(&self.importance_raw)
    }
}

pub(crate) fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        raw.to_vec()
    }
}

/// Fit a classification tree. `weights` default to 1; `rng` is required
/// only when `max_features` subsamples candidates per split.
pub fn fit_classification(
    x: &[Vec<f64>],
    y: &[u8],
    weights: Option<&[f64]>,
    params: &TreeParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> ClassificationTree {
    let n = x.len();
    let d = if n > 0 { x[0].len() } else { 0 };
    let uniform = vec![1.0; n];
    let w = weights.unwrap_or(&uniform);
    let mut importance_raw = vec![0.0; d];
    let total_weight: f64 = w.iter().sum();
    let rows: Vec<usize> = (0..n).collect();
    let root = grow(
        x,
        y,
        w,
        &rows,
        params,
        0,
        total_weight,
        &mut importance_raw,
        &mut rng,
    );
    let mut tree = ClassificationTree { root, num_features: d, importance_raw };
    if params.ccp_alpha > 0.0 {
        cost_complexity_prune(&mut tree.root, params, total_weight, params.ccp_alpha);
    }
    tree
}

#[allow(clippy::too_many_arguments)]
fn grow(
    x: &[Vec<f64>],
    y: &[u8],
    w: &[f64],
    rows: &[usize],
    params: &TreeParams,
    depth: usize,
    total_weight: f64,
    importance: &mut [f64],
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Node {
    let mut counts = [0.0; 2];
    for &i in rows {
        counts[y[i] as usize] += w[i];
    }
    let node_weight = counts[0] + counts[1];
    let impurity = params.criterion.impurity(&counts);

    let depth_ok = params.max_depth.map_or(true, |d| depth < d);
    if impurity <= 0.0 || rows.len() < params.min_split || !depth_ok {
        return Node::Leaf { counts };
    }

    let candidates = candidate_features(x[0].len(), params.max_features, rng);
    let best = find_best_split(x, y, w, rows, &candidates, params, &counts);
    match best {
        Some(split) => {
            let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
            for &i in rows {
                if x[i][split.feature] <= split.threshold {
                    left_rows.push(i);
                } else {
                    right_rows.push(i);
                }
            }
            importance[split.feature] += node_weight / total_weight * split.decrease;
            let left = grow(x, y, w, &left_rows, params, depth + 1, total_weight, importance, rng);
            let right =
                grow(x, y, w, &right_rows, params, depth + 1, total_weight, importance, rng);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        None => Node::Leaf { counts },
    }
}

fn candidate_features(
    d: usize,
    max_features: MaxFeatures,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    let k = match max_features {
        MaxFeatures::All => d,
        MaxFeatures::Sqrt => (d as f64).sqrt().round().max(1.0) as usize,
        MaxFeatures::Log2 => (d as f64).log2().floor().max(1.0) as usize,
    };
    let k = k.min(d);
    if k == d {
        return (0..d).collect();
    }
    match rng {
        Some(rng) => {
            let mut all: Vec<usize> = (0..d).collect();
            all.shuffle(rng);
            let mut chosen: Vec<usize> = all[..k].to_vec();
            chosen.sort_unstable();
            chosen
        }
        // Without an rng the subsample degenerates to the full set so the
        // fit stays deterministic.
        None => (0..d).collect(),
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn find_best_split(
    x: &[Vec<f64>],
    y: &[u8],
    w: &[f64],
    rows: &[usize],
    candidates: &[usize],
    params: &TreeParams,
    parent_counts: &[f64; 2],
) -> Option<SplitChoice> {
    let parent_weight = parent_counts[0] + parent_counts[1];
    let parent_impurity = params.criterion.impurity(parent_counts);
    let mut best: Option<SplitChoice> = None;

    for &feature in candidates {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));

        let mut left = [0.0; 2];
        let mut right = *parent_counts;
        for pos in 0..order.len() - 1 {
            let i = order[pos];
            left[y[i] as usize] += w[i];
            right[y[i] as usize] -= w[i];
            let v_here = x[i][feature];
            let v_next = x[order[pos + 1]][feature];
            if v_here == v_next {
                continue;
            }
            let n_left = pos + 1;
            let n_right = order.len() - n_left;
            if n_left < params.min_leaf || n_right < params.min_leaf {
                continue;
            }
            let wl = left[0] + left[1];
            let wr = right[0] + right[1];
            if wl <= 0.0 || wr <= 0.0 {
                continue;
            }
            let decrease = parent_impurity
                - (wl * params.criterion.impurity(&left)
                    + wr * params.criterion.impurity(&right))
                    / parent_weight;
            if decrease <= 1e-15 {
                continue;
            }
            // Strict improvement keeps the lowest (feature, threshold).
            if best.as_ref().map_or(true, |b| decrease > b.decrease) {
                best = Some(SplitChoice {
                    feature,
                    threshold: 0.5 * (v_here + v_next),
                    decrease,
                });
            }
        }
    }
    best
}

/// Weakest-link pruning: collapse splits whose per-leaf risk saving is
/// at most `alpha`.
fn cost_complexity_prune(root: &mut Node, params: &TreeParams, total_weight: f64, alpha: f64) {
    loop {
        let mut weakest: Option<(*mut Node, f64)> = None;
        find_weakest(root, params, total_weight, &mut weakest);
        match weakest {
            Some((node_ptr, g)) if g <= alpha => {
                let node = unsafe { &mut *node_ptr };
                let counts = subtree_counts(node);
                *node = Node::Leaf { counts };
            }
            _ => break,
        }
    }
}

fn subtree_counts(node: &Node) -> [f64; 2] {
    match node {
        Node::Leaf { counts } => *counts,
        Node::Split { left, right, .. } => {
            let l = subtree_counts(left);
            let r = subtree_counts(right);
            [l[0] + r[0], l[1] + r[1]]
        }
    }
}

fn subtree_risk(node: &Node, params: &TreeParams, total_weight: f64) -> f64 {
    match node {
        Node::Leaf { counts } => {
            (counts[0] + counts[1]) / total_weight * params.criterion.impurity(counts)
        }
        Node::Split { left, right, .. } => {
            subtree_risk(left, params, total_weight) + subtree_risk(right, params, total_weight)
        }
    }
}

fn find_weakest(
    node: &mut Node,
    params: &TreeParams,
    total_weight: f64,
    weakest: &mut Option<(*mut Node, f64)>,
) {
    if matches!(node, Node::Leaf { .. }) {
        return;
    }
    let counts = subtree_counts(node);
    let own_risk = (counts[0] + counts[1]) / total_weight * params.criterion.impurity(&counts);
    let sub_risk = subtree_risk(node, params, total_weight);
    let leaves = node.leaves();
    if leaves > 1 {
        let g = (own_risk - sub_risk) / (leaves - 1) as f64;
        if weakest.map_or(true, |(_, wg)| g < wg) {
            *weakest = Some((node as *mut Node, g));
        }
    }
    if let Node::Split { left, right, .. } = node {
        find_weakest(left, params, total_weight, weakest);
        find_weakest(right, params, total_weight, weakest);
    }
}

// ---------------------------------------------------------------------
// Regression tree (boosting base learner)
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum RegNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: Box<RegNode>, right: Box<RegNode> },
}

impl RegNode {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            RegNode::Leaf { value } => *value,
            RegNode::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    left.predict_row(row)
                } else {
                    right.predict_row(row)
                }
            }
        }
    }
}

pub struct RegParams {
    pub max_depth: usize,
    pub min_split: usize,
    pub min_leaf: usize,
}

/// Fit a regression tree on gradient/hessian pairs: splits maximize the
/// squared-error reduction of the gradients, leaf values take one Newton
/// step `sum(g) / sum(h)`.
pub fn fit_regression(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    params: &RegParams,
    importance: Option<&mut [f64]>,
) -> RegNode {
    let mut fallback = vec![0.0; x.first().map_or(0, |r| r.len())];
    let imp: &mut [f64] = match importance {
        Some(slice) => slice,
        None => &mut fallback,
    };
    grow_regression(x, grad, hess, rows, params, 0, rows.len() as f64, imp)
}

fn leaf_value(grad: &[f64], hess: &[f64], rows: &[usize]) -> f64 {
    let g: f64 = rows.iter().map(|&i| grad[i]).sum();
    let h: f64 = rows.iter().map(|&i| hess[i]).sum();
    g / h.max(1e-10)
}

fn grow_regression(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    params: &RegParams,
    depth: usize,
    total_rows: f64,
    importance: &mut [f64],
) -> RegNode {
    if rows.len() < params.min_split || depth >= params.max_depth {
        return RegNode::Leaf { value: leaf_value(grad, hess, rows) };
    }

    // Variance-reduction split: maximize sum_L^2/n_L + sum_R^2/n_R.
    let sum_all: f64 = rows.iter().map(|&i| grad[i]).sum();
    let n_all = rows.len() as f64;
    let base_score = sum_all * sum_all / n_all;
    let mut best: Option<(usize, f64, f64)> = None; // feature, threshold, gain

    for feature in 0..x[0].len() {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let mut sum_left = 0.0;
        for pos in 0..order.len() - 1 {
            sum_left += grad[order[pos]];
            let v_here = x[order[pos]][feature];
            let v_next = x[order[pos + 1]][feature];
            if v_here == v_next {
                continue;
            }
            let n_left = (pos + 1) as f64;
            let n_right = n_all - n_left;
            if (pos + 1) < params.min_leaf || (order.len() - pos - 1) < params.min_leaf {
                continue;
            }
            let sum_right = sum_all - sum_left;
            let gain =
                sum_left * sum_left / n_left + sum_right * sum_right / n_right - base_score;
            if gain <= 1e-15 {
                continue;
            }
            if best.map_or(true, |(_, _, g)| gain > g) {
                best = Some((feature, 0.5 * (v_here + v_next), gain));
            }
        }
    }

    match best {
        Some((feature, threshold, gain)) => {
            importance[feature] += gain * (rows.len() as f64 / total_rows);
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for &i in rows {
                if x[i][feature] <= threshold {
                    l.push(i);
                } else {
                    r.push(i);
                }
            }
            RegNode::Split {
                feature,
                threshold,
                left: Box::new(grow_regression(
                    x, grad, hess, &l, params, depth + 1, total_rows, importance,
                )),
                right: Box::new(grow_regression(
                    x, grad, hess, &r, params, depth + 1, total_rows, importance,
                )),
            }
        }
        None => RegNode::Leaf { value: leaf_value(grad, hess, rows) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_node_is_a_leaf() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![1, 1, 1];
        let tree = fit_classification(&x, &y, None, &TreeParams::default(), None);
        assert!(matches!(tree.root, Node::Leaf { .. }));
        assert_eq!(tree.predict_row(&[5.0]), 1);
    }

    #[test]
    fn gini_of_even_split_is_half() {
        assert!((Criterion::Gini.impurity(&[5.0, 5.0]) - 0.5).abs() < 1e-12);
        assert_eq!(Criterion::Gini.impurity(&[4.0, 0.0]), 0.0);
    }

    #[test]
    fn depth_one_tree_recovers_threshold() {
        // 1-D data split at 2.5 (midpoint of 2 and 3).
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y = vec![0, 0, 0, 1, 1, 1];
        let params = TreeParams { max_depth: Some(1), ..TreeParams::default() };
        let tree = fit_classification(&x, &y, None, &params, None);
        match &tree.root {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!((threshold - 2.5).abs() < 1e-12);
            }
            Node::Leaf { .. } => panic!("expected a split"),
        }
        assert_eq!(tree.predict_row(&[0.0]), 0);
        assert_eq!(tree.predict_row(&[9.0]), 1);
    }

    #[test]
    fn tie_break_prefers_lowest_feature() {
        // Feature 0 and 1 are identical copies; the split must use 0.
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64]).collect();
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let tree = fit_classification(&x, &y, None, &TreeParams::default(), None);
        match &tree.root {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            Node::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn monotone_feature_transform_keeps_predictions() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 7) as f64, (i % 5) as f64])
            .collect();
        let y: Vec<u8> = (0..20).map(|i| u8::from((i % 7) >= 3)).collect();
        let transform = |v: f64| (v + 1.0).powi(3); // strictly monotone
        let xt: Vec<Vec<f64>> = x.iter().map(|r| vec![transform(r[0]), r[1]]).collect();

        let a = fit_classification(&x, &y, None, &TreeParams::default(), None);
        let b = fit_classification(&xt, &y, None, &TreeParams::default(), None);
        for (r, rt) in x.iter().zip(&xt) {
            assert_eq!(a.predict_row(r), b.predict_row(rt));
        }
    }

    #[test]
    fn row_weights_shift_the_split() {
        // Unweighted the majority class wins at the root; upweighting the
        // minority flips the leaf prediction.
        let x = vec![vec![0.0], vec![0.1], vec![0.2], vec![0.3]];
        let y = vec![0, 0, 0, 1];
        let params = TreeParams { max_depth: Some(0), ..TreeParams::default() };
        let unweighted = fit_classification(&x, &y, None, &params, None);
        assert_eq!(unweighted.predict_row(&[0.0]), 0);
        let weighted =
            fit_classification(&x, &y, Some(&[0.1, 0.1, 0.1, 10.0]), &params, None);
        assert_eq!(weighted.predict_row(&[0.0]), 1);
    }

    #[test]
    fn pruning_collapses_marginal_splits() {
        // One noisy point; aggressive alpha prunes back to the stump.
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let mut y: Vec<u8> = (0..16).map(|i| u8::from(i >= 8)).collect();
        y[3] = 1;
        let full = fit_classification(&x, &y, None, &TreeParams::default(), None);
        // The subtree isolating the noisy point saves risk 0.109 across
        // two extra leaves (g ~ 0.0547), so alpha = 0.06 collapses it.
        let pruned = fit_classification(
            &x,
            &y,
            None,
            &TreeParams { ccp_alpha: 0.06, ..TreeParams::default() },
            None,
        );
        assert!(pruned.root.leaves() < full.root.leaves());
        // Pruned tree still gets the clean majority structure right.
        assert_eq!(pruned.predict_row(&[0.0]), 0);
        assert_eq!(pruned.predict_row(&[15.0]), 1);
    }

    #[test]
    fn regression_tree_fits_step_function() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let grad: Vec<f64> = (0..10).map(|i| if i < 5 { -1.0 } else { 1.0 }).collect();
        let hess = vec![1.0; 10];
        let rows: Vec<usize> = (0..10).collect();
        let params = RegParams { max_depth: 2, min_split: 2, min_leaf: 1 };
        let tree = fit_regression(&x, &grad, &hess, &rows, &params, None);
        assert!((tree.predict_row(&[0.0]) + 1.0).abs() < 1e-9);
        assert!((tree.predict_row(&[9.0]) - 1.0).abs() < 1e-9);
    }
}
