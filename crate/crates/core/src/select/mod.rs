//! Feature selection: Mann-Whitney filtering, LASSO embedded selection,
//! Relief-F ranking with sequential forward selection, and recursive
//! feature elimination with cross-validation.

pub mod lasso;
pub mod mannwhitney;
pub mod relieff;
pub mod rfecv;
pub mod sfs;

pub use lasso::{lasso_fit, lasso_select, LassoModel};
pub use mannwhitney::{mann_whitney_u, midranks, UTestResult};
pub use relieff::{relieff, ReliefState};
pub use rfecv::rfecv;
pub use sfs::sfs;

use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

/// Outcome of any selection strategy: a feature mask, per-feature
/// scores, and the trace of candidate evaluations that led there.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub method: String,
    pub seed: u64,
    pub mask: Vec<bool>,
    pub scores: Vec<f64>,
    /// (subset size or lambda, CV score) pairs in visit order.
    pub trace: Vec<(f64, f64)>,
    pub flags: Vec<String>,
}

impl SelectionResult {
    pub fn num_selected(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn selected_names(&self, column_names: &[String]) -> Vec<String> {
        self.mask
            .iter()
            .zip(column_names)
            .filter(|(&m, _)| m)
            .map(|(_, n)| n.clone())
            .collect()
    }

    /// Structured text report: method, seed, selected columns, trace.
    pub fn to_report(&self, column_names: &[String]) -> String {
        let mut out = String::new();
        out.push_str(&format!("method: {}\n", self.method));
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("selected ({}):\n", self.num_selected()));
        for name in self.selected_names(column_names) {
            out.push_str(&format!("  {name}\n"));
        }
        if !self.flags.is_empty() {
            out.push_str(&format!("flags: {}\n", self.flags.join(";")));
        }
        out.push_str("trace:\n");
        for (key, score) in &self.trace {
            out.push_str(&format!("  {key},{score}\n"));
        }
        out
    }
}

/// Mann-Whitney filter: keep features whose two-sided p-value clears
/// `alpha`; scores are -log10(p). An empty selection falls back to the
/// single smallest-p feature, flagged.
pub fn mw_select(table: &FeatureTable, alpha: f64) -> Result<SelectionResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
    }
    let stats = crate::dataset::group_stats(table)?;
    let d = table.num_features();
    let mut mask = vec![false; d];
    let mut scores = vec![0.0; d];
    let mut flags = Vec::new();
    for j in 0..d {
        let p = stats.p_value[j];
        scores[j] = -p.log10();
        mask[j] = p < alpha;
    }
    if mask.iter().all(|&m| !m) {
        let best = (0..d)
            .min_by(|&a, &b| stats.p_value[a].total_cmp(&stats.p_value[b]))
            .expect("non-empty table");
        mask[best] = true;
        flags.push("no_feature_cleared_alpha".into());
    }
    Ok(SelectionResult {
        method: format!("mann_whitney(alpha={alpha})"),
        seed: 0,
        mask,
        scores,
        trace: vec![],
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn labelled_table(
        n: usize,
        d: usize,
        informative: &[usize],
        shift: f64,
        seed: u64,
    ) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut groups = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let mut row: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if label == 1 {
                for &j in informative {
                    row[j] += shift;
                }
            }
            rows.push(row);
            groups.push(format!("g{i}"));
            labels.push(label);
        }
        FeatureTable::new(
            rows,
            (0..d).map(|j| format!("feat_{j}")).collect(),
            groups,
            labels,
        )
        .unwrap()
    }

    #[test]
    fn informative_feature_is_always_selected() {
        for seed in 0..10 {
            let t = labelled_table(100, 6, &[2], 1.75, seed); // ~3 sigma of U(-1,1)
            let r = mw_select(&t, 0.05).unwrap();
            assert!(r.mask[2], "seed {seed}: informative feature missed");
        }
    }

    #[test]
    fn null_features_selected_at_about_alpha_rate() {
        // Monte-Carlo over pure-noise tables: the expected number of
        // selected features is alpha * D; assert under 2x.
        let d = 20;
        let mut selected_total = 0usize;
        let trials = 40;
        for seed in 0..trials {
            let t = labelled_table(80, d, &[], 0.0, 1000 + seed);
            selected_total += mw_select(&t, 0.05).unwrap().num_selected();
        }
        let expected = 0.05 * (d * trials as usize) as f64;
        assert!(
            (selected_total as f64) <= 2.0 * expected,
            "{selected_total} selections vs expected {expected}"
        );
    }

    #[test]
    fn empty_selection_falls_back_to_best_feature() {
        // One row per class with identical values: p = 1 everywhere.
        let t = labelled_table(30, 4, &[], 0.0, 77);
        let r = mw_select(&t, 1e-12).unwrap();
        assert_eq!(r.num_selected(), 1);
        assert!(r.flags.iter().any(|f| f == "no_feature_cleared_alpha"));
    }

    #[test]
    fn report_lists_selected_names() {
        let t = labelled_table(60, 3, &[0], 2.0, 5);
        let r = mw_select(&t, 0.05).unwrap();
        let report = r.to_report(&t.column_names);
        assert!(report.contains("method: mann_whitney"));
        assert!(report.contains("feat_0"));
    }
}
