//! L2-penalized logistic regression fit by iteratively reweighted least
//! squares (Newton steps with step halving). The intercept is never
//! penalized; penalty strength is `1/(2C) ||w||^2` on summed (not
//! averaged) cross-entropy, matching the usual C convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c: f64,
}

impl LogRegModel {
    /// Decision value `w . x + b` (the logit).
    pub fn decision_row(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.intercept
    }

    pub fn probability_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision_row(row))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Penalized loss and its gradient at (weights, intercept); the gradient
/// vector carries the intercept component last. Public so oracle tests
/// can check the analytic gradient against finite differences.
pub fn penalized_loss_grad(
    x: &[Vec<f64>],
    y: &[u8],
    weights: &[f64],
    intercept: f64,
    c: f64,
) -> (f64, Vec<f64>) {
    let d = weights.len();
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (row, &label) in x.iter().zip(y) {
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + intercept;
        let p = sigmoid(z);
        let t = label as f64;
        let p_safe = p.clamp(1e-12, 1.0 - 1e-12);
        loss -= t * p_safe.ln() + (1.0 - t) * (1.0 - p_safe).ln();
        let r = p - t;
        for (g, v) in grad[..d].iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
    }
    for (g, w) in grad[..d].iter_mut().zip(weights) {
        *g += w / c;
    }
    loss += weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * c);
    (loss, grad)
}

pub fn logreg_fit(x: &[Vec<f64>], y: &[u8], c: f64, max_iter: usize) -> Result<LogRegModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput("empty or mismatched training data".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput("C must be positive".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic regression input".into()));
    }
    let d = x[0].len();
    let mut weights = vec![0.0; d];
    let mut intercept = 0.0;
    let (mut loss, mut grad) = penalized_loss_grad(x, y, &weights, intercept, c);

    for _ in 0..max_iter {
        let grad_inf = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_inf < GRAD_TOL {
            break;
        }

        // Newton system: (X' W X + diag(1/C, ..., 0)) step = -grad,
        // on the augmented design [X | 1].
        let mut h = vec![vec![0.0; d + 1]; d + 1];
        for row in x {
            let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + intercept;
            let p = sigmoid(z);
            let wgt = (p * (1.0 - p)).max(1e-10);
            for a in 0..=d {
                let xa = if a < d { row[a] } else { 1.0 };
                if xa == 0.0 {
                    continue;
                }
                for b in a..=d {
                    let xb = if b < d { row[b] } else { 1.0 };
                    h[a][b] += wgt * xa * xb;
                }
            }
        }
        for a in 0..d {
            h[a][a] += 1.0 / c;
        }
        for a in 0..=d {
            for b in 0..a {
                h[a][b] = h[b][a];
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let step = match linalg::solve(h, neg_grad) {
            Some(s) => s,
            None => return Err(Error::NonFinite("singular IRLS system".into())),
        };

        // Step halving: accept the first scale that lowers the loss.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial_w: Vec<f64> =
                weights.iter().zip(&step[..d]).map(|(w, s)| w + scale * s).collect();
            let trial_b = intercept + scale * step[d];
            let (trial_loss, trial_grad) = penalized_loss_grad(x, y, &trial_w, trial_b, c);
            if trial_loss <= loss {
                weights = trial_w;
                intercept = trial_b;
                loss = trial_loss;
                grad = trial_grad;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break; // no descent direction left at f64 resolution
        }
    }

    Ok(LogRegModel { weights, intercept, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_clusters(n: usize, gap: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = (i % 2) as u8;
            let center = if label == 1 { gap } else { -gap };
            x.push(vec![
                center + rng.random_range(-0.5..0.5),
                rng.random_range(-1.0..1.0),
            ]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn zero_logit_is_half_probability() {
        let m = LogRegModel { weights: vec![0.0; 3], intercept: 0.0, c: 1.0 };
        assert_eq!(m.probability_row(&[1.0, -2.0, 3.0]), 0.5);
    }

    #[test]
    fn separable_clusters_reach_full_training_accuracy() {
        let (x, y) = two_clusters(60, 3.0, 1);
        let m = logreg_fit(&x, &y, 1.0, 100).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(row, &label)| u8::from(m.decision_row(row) > 0.0) == label)
            .count();
        assert_eq!(correct, 60);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let (x, y) = two_clusters(25, 1.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let w: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: f64 = rng.random_range(-1.0..1.0);
            let (_, grad) = penalized_loss_grad(&x, &y, &w, b, 2.0);
            let eps = 1e-6;
            for j in 0..=2 {
                let mut wp = w.clone();
                let mut wm = w.clone();
                let (mut bp, mut bm) = (b, b);
                if j < 2 {
                    wp[j] += eps;
                    wm[j] -= eps;
                } else {
                    bp += eps;
                    bm -= eps;
                }
                let (lp, _) = penalized_loss_grad(&x, &y, &wp, bp, 2.0);
                let (lm, _) = penalized_loss_grad(&x, &y, &wm, bm, 2.0);
                let fd = (lp - lm) / (2.0 * eps);
                let rel = (grad[j] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel < 1e-4, "component {j}: analytic {} vs fd {fd}", grad[j]);
            }
        }
    }

    #[test]
    fn converged_gradient_is_small() {
        let (x, y) = two_clusters(40, 1.0, 4);
        let m = logreg_fit(&x, &y, 1.0, 100).unwrap();
        let (_, grad) = penalized_loss_grad(&x, &y, &m.weights, m.intercept, 1.0);
        let inf = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        assert!(inf < 1e-5, "gradient norm {inf}");
    }

    #[test]
    fn loss_decreases_monotonically_over_irls_iterations() {
        // Re-run the fit with increasing iteration caps; the final loss
        // must never go up as more Newton steps are allowed.
        let (x, y) = two_clusters(50, 0.7, 5);
        let mut last = f64::INFINITY;
        for iters in 1..8 {
            let m = logreg_fit(&x, &y, 1.0, iters).unwrap();
            let (loss, _) = penalized_loss_grad(&x, &y, &m.weights, m.intercept, 1.0);
            assert!(loss <= last + 1e-12, "iters {iters}: {loss} > {last}");
            last = loss;
        }
    }
}
