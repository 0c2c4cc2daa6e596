//! LASSO by cyclic coordinate descent with soft thresholding, and
//! embedded feature selection along a cross-validated regularization
//! path.
//!
//! Objective: `1/(2N) ||y - X b||^2 + lambda ||b||_1` on standardized
//! features and centered 0/1 labels, so `lambda_max = max |X'y| / N`
//! zeroes every coefficient.

use crate::dataset::{FeatureTable, Standardizer};
use crate::error::{Error, Result};
use crate::eval::FoldPlan;

use super::SelectionResult;

const COORD_TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 10_000;
pub const PATH_POINTS: usize = 100;
pub const PATH_FLOOR_RATIO: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LassoModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// (lambda, mean CV squared loss) pairs when fit along a path.
    pub cv_curve: Vec<(f64, f64)>,
}

impl LassoModel {
    pub fn support(&self) -> Vec<usize> {
        (0..self.coefficients.len())
            .filter(|&j| self.coefficients[j] != 0.0)
            .collect()
    }
}

fn soft_threshold(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

/// One coordinate-descent solve at fixed lambda. `x` must be
/// standardized and `y` centered; `warm` seeds the coefficients.
pub fn lasso_fit(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<LassoModel> {
    lasso_fit_warm(x, y, lambda, None)
}

pub fn lasso_fit_warm(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    warm: Option<&[f64]>,
) -> Result<LassoModel> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidInput("empty or mismatched lasso input".into()));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidInput("lambda must be non-negative".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lasso input".into()));
    }
    let d = x[0].len();
    let nf = n as f64;

    // Column-major copy for the sweep.
    let cols: Vec<Vec<f64>> = (0..d).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let col_sq: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();

    let mut beta: Vec<f64> = match warm {
        Some(w) if w.len() == d => w.to_vec(),
        _ => vec![0.0; d],
    };
    let mut residual: Vec<f64> = y.to_vec();
    for j in 0..d {
        if beta[j] != 0.0 {
            for (r, v) in residual.iter_mut().zip(&cols[j]) {
                *r -= beta[j] * v;
            }
        }
    }

    for _ in 0..MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..d {
            if col_sq[j] <= 0.0 {
                continue; // constant column cannot carry signal
            }
            let rho = cols[j]
                .iter()
                .zip(&residual)
                .map(|(v, r)| v * r)
                .sum::<f64>()
                / nf
                + col_sq[j] * beta[j];
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, v) in residual.iter_mut().zip(&cols[j]) {
                    *r -= delta * v;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < COORD_TOL {
            break;
        }
    }

    Ok(LassoModel { coefficients: beta, intercept: 0.0, lambda, cv_curve: vec![] })
}

/// Largest lambda with an all-zero solution: `max |X'y| / N`.
pub fn lambda_max(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let d = x.first().map_or(0, |r| r.len());
    (0..d)
        .map(|j| x.iter().zip(y).map(|(r, v)| r[j] * v).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

/// Max KKT violation over zero coefficients: at optimum the subgradient
/// bound requires `|X_j' r / N| <= lambda` wherever `beta_j = 0`.
pub fn kkt_violation(x: &[Vec<f64>], y: &[f64], model: &LassoModel) -> f64 {
    let n = x.len() as f64;
    let d = model.coefficients.len();
    let residual: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(row, &v)| {
            v - row
                .iter()
                .zip(&model.coefficients)
                .map(|(x, b)| x * b)
                .sum::<f64>()
        })
        .collect();
    let mut worst = 0.0f64;
    for j in 0..d {
        if model.coefficients[j] == 0.0 {
            let grad = x
                .iter()
                .zip(&residual)
                .map(|(row, r)| row[j] * r)
                .sum::<f64>()
                / n;
            worst = worst.max(grad.abs() - model.lambda);
        }
    }
    worst
}

/// Log-spaced path from `lambda_max` down to `ratio * lambda_max`.
fn lambda_grid(lmax: f64) -> Vec<f64> {
    let lo = (lmax * PATH_FLOOR_RATIO).ln();
    let hi = lmax.ln();
    (0..PATH_POINTS)
        .map(|i| (hi + (lo - hi) * i as f64 / (PATH_POINTS - 1) as f64).exp())
        .collect()
}

/// How the regularization strength is read off the CV curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    /// The grid point minimizing mean CV loss. Tends to over-select:
    /// the CV valley is flat below the optimum, so noise features slip
    /// into the support.
    Min,
    /// The largest lambda within one standard error of the minimum;
    /// the usual choice when the support itself is the product.
    OneStdErr,
}

/// Path selection on a continuous target: choose lambda by squared-loss
/// cross-validation over the given row-to-fold assignment, refit on all
/// rows, and return the model at the chosen lambda.
///
/// Features are standardized and the target centered internally, per
/// training fold; the final refit standardizes on everything.
pub fn lasso_path_select(
    x: &[Vec<f64>],
    y: &[f64],
    fold_of_row: &[usize],
    k: usize,
) -> Result<LassoModel> {
    lasso_path_select_with(x, y, fold_of_row, k, LambdaRule::OneStdErr)
}

pub fn lasso_path_select_with(
    x: &[Vec<f64>],
    y: &[f64],
    fold_of_row: &[usize],
    k: usize,
    rule: LambdaRule,
) -> Result<LassoModel> {
    let n = x.len();
    if n == 0 || y.len() != n || fold_of_row.len() != n {
        return Err(Error::InvalidInput("mismatched lasso path input".into()));
    }

    let standardize = |rows: &[usize]| -> (Vec<f64>, Vec<f64>) {
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        let mut std = vec![1.0; d];
        for j in 0..d {
            let m = rows.iter().map(|&i| x[i][j]).sum::<f64>() / rows.len() as f64;
            let var =
                rows.iter().map(|&i| (x[i][j] - m).powi(2)).sum::<f64>() / rows.len() as f64;
            mean[j] = m;
            if var > 0.0 {
                std[j] = var.sqrt();
            }
        }
        (mean, std)
    };
    let apply = |row: &[f64], mean: &[f64], std: &[f64]| -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| (v - mean[j]) / std[j])
            .collect()
    };

    // Shared grid anchored at the full-data lambda_max.
    let all_rows: Vec<usize> = (0..n).collect();
    let (full_mean, full_sd) = standardize(&all_rows);
    let full_x: Vec<Vec<f64>> = x.iter().map(|r| apply(r, &full_mean, &full_sd)).collect();
    let y_mean = crate::dsp::mean(y);
    let full_y: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let grid = lambda_grid(lambda_max(&full_x, &full_y));

    // Per-fold warm-started paths.
    let mut fold_loss = vec![vec![0.0; grid.len()]; k];
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..n).filter(|&i| fold_of_row[i] != fold).collect();
        let test_idx: Vec<usize> = (0..n).filter(|&i| fold_of_row[i] == fold).collect();
        if train_idx.len() < 2 || test_idx.is_empty() {
            return Err(Error::InvalidInput(format!("fold {fold} too small for lasso CV")));
        }
        let (mean, sd) = standardize(&train_idx);
        let train_x: Vec<Vec<f64>> =
            train_idx.iter().map(|&i| apply(&x[i], &mean, &sd)).collect();
        let train_y_mean = train_idx.iter().map(|&i| y[i]).sum::<f64>() / train_idx.len() as f64;
        let train_y: Vec<f64> = train_idx.iter().map(|&i| y[i] - train_y_mean).collect();

        let mut warm: Option<Vec<f64>> = None;
        for (gi, &lambda) in grid.iter().enumerate() {
            let model = lasso_fit_warm(&train_x, &train_y, lambda, warm.as_deref())?;
            let mut loss = 0.0;
            for &i in &test_idx {
                let z = apply(&x[i], &mean, &sd);
                let pred = train_y_mean
                    + z.iter()
                        .zip(&model.coefficients)
                        .map(|(v, b)| v * b)
                        .sum::<f64>();
                loss += (pred - y[i]).powi(2);
            }
            fold_loss[fold][gi] = loss / test_idx.len() as f64;
            warm = Some(model.coefficients);
        }
    }
    let cv_loss: Vec<f64> = (0..grid.len())
        .map(|gi| (0..k).map(|f| fold_loss[f][gi]).sum::<f64>() / k as f64)
        .collect();

    let min_idx = (0..grid.len())
        .min_by(|&a, &b| cv_loss[a].total_cmp(&cv_loss[b]))
        .expect("non-empty grid");
    let best_idx = match rule {
        LambdaRule::Min => min_idx,
        LambdaRule::OneStdErr => {
            let at_min: Vec<f64> = (0..k).map(|f| fold_loss[f][min_idx]).collect();
            let se = crate::dsp::std_sample(&at_min) / (k as f64).sqrt();
            // The grid runs from lambda_max downward, so the first index
            // within one SE is the largest such lambda.
            (0..=min_idx)
                .find(|&gi| cv_loss[gi] <= cv_loss[min_idx] + se)
                .unwrap_or(min_idx)
        }
    };

    // Refit on all rows, warm-started along the path prefix.
    let mut warm: Option<Vec<f64>> = None;
    let mut final_model = None;
    for &lambda in grid.iter().take(best_idx + 1) {
        let m = lasso_fit_warm(&full_x, &full_y, lambda, warm.as_deref())?;
        warm = Some(m.coefficients.clone());
        final_model = Some(m);
    }
    let mut model = final_model.expect("at least one grid point");
    model.intercept = y_mean;
    model.cv_curve = grid.iter().copied().zip(cv_loss.iter().copied()).collect();
    Ok(model)
}

/// Embedded selection on a labelled table: squared loss against the 0/1
/// labels over the shared group-wise fold plan; the mask is the nonzero
/// support at the chosen lambda.
pub fn lasso_select(table: &FeatureTable, plan: &FoldPlan) -> Result<(SelectionResult, LassoModel)> {
    let d = table.num_features();
    let y: Vec<f64> = table.labels.iter().map(|&l| l as f64).collect();
    let fold_of_row: Vec<usize> = table
        .groups
        .iter()
        .map(|g| {
            plan.fold_of(g)
                .ok_or_else(|| Error::InvalidInput(format!("group {g} missing from fold plan")))
        })
        .collect::<Result<_>>()?;
    let model = lasso_path_select(&table.rows, &y, &fold_of_row, plan.k)?;

    let mut mask: Vec<bool> = model.coefficients.iter().map(|&b| b != 0.0).collect();
    let mut flags = Vec::new();
    if mask.iter().all(|&m| !m) {
        // Degenerate path: fall back to the strongest single correlate.
        let std = Standardizer::fit_all(table)?;
        let z = std.apply_matrix(&table.rows);
        let y_mean = crate::dsp::mean(&y);
        let centered: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let best = (0..d)
            .max_by(|&a, &b| {
                let ca = z.iter().zip(&centered).map(|(r, v)| r[a] * v).sum::<f64>().abs();
                let cb = z.iter().zip(&centered).map(|(r, v)| r[b] * v).sum::<f64>().abs();
                ca.total_cmp(&cb)
            })
            .expect("non-empty");
        mask[best] = true;
        flags.push("empty_support_fallback".into());
    }

    let result = SelectionResult {
        method: format!("lasso(lambda={:.6e})", model.lambda),
        seed: plan.seed,
        mask,
        scores: model.coefficients.iter().map(|b| b.abs()).collect(),
        trace: model.cv_curve.clone(),
        flags,
    };
    Ok((result, model))
}
