//! Soft-margin SVM trained by sequential minimal optimization
//! (Platt 1998): pairwise coordinate ascent on the dual with C-box
//! constraints, a maintained error cache, and the |E1 - E2| second-choice
//! heuristic. Iteration order is fixed, so fits are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaSpec {
    /// 1 / (D * var(X)), variance over all matrix entries.
    Scale,
    /// 1 / D.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SvmKernel {
    Linear,
    Rbf { gamma: GammaSpec },
    /// (gamma <x, x'> + 1)^degree
    Poly { degree: u32, gamma: GammaSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_x: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector (y in {-1, +1}).
    pub alpha_y: Vec<f64>,
    pub bias: f64,
    pub kernel: SvmKernel,
    /// Gamma resolved to a number at fit time.
    pub gamma: f64,
    pub c: f64,
    pub num_features: usize,
}

#[derive(Debug, Clone)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: SvmKernel,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, kernel: SvmKernel::Rbf { gamma: GammaSpec::Scale }, tol: 1e-3, max_passes: 200 }
    }
}

fn kernel_eval(kernel: SvmKernel, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let dot = || -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    match kernel {
        SvmKernel::Linear => dot(),
        SvmKernel::Rbf { .. } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * d2).exp()
        }
        SvmKernel::Poly { degree, .. } => (gamma * dot() + 1.0).powi(degree as i32),
    }
}

fn resolve_gamma(kernel: SvmKernel, x: &[Vec<f64>]) -> f64 {
    let spec = match kernel {
        SvmKernel::Linear => return 0.0,
        SvmKernel::Rbf { gamma } | SvmKernel::Poly { gamma, .. } => gamma,
    };
    let d = x[0].len() as f64;
    match spec {
        GammaSpec::Auto => 1.0 / d,
        GammaSpec::Value(v) => v,
        GammaSpec::Scale => {
            let flat: Vec<f64> = x.iter().flatten().copied().collect();
            let mean = crate::dsp::mean(&flat);
            let var = flat.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / flat.len() as f64;
            if var > 0.0 {
                1.0 / (d * var)
            } else {
                1.0 / d
            }
        }
    }
}

pub fn svm_fit(x: &[Vec<f64>], y: &[u8], params: &SvmParams) -> Result<SvmModel> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::InvalidInput("empty or mismatched training data".into()));
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidInput("C must be positive".into()));
    }
    let gamma = resolve_gamma(params.kernel, x);
    let target: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    // Full Gram matrix; training sets here are at most ~1k rows.
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let k = kernel_eval(params.kernel, gamma, &x[i], &x[j]);
            if !k.is_finite() {
                return Err(Error::NonFinite("kernel value".into()));
            }
            gram[i][j] = k;
            gram[j][i] = k;
        }
    }

    let mut solver = Smo {
        gram: &gram,
        target: &target,
        c: params.c,
        tol: params.tol,
        alpha: vec![0.0; n],
        errors: target.iter().map(|t| -t).collect(), // f(x) = 0 initially
        bias: 0.0,
    };
    solver.run(params.max_passes);

    let mut support_x = Vec::new();
    let mut alpha_y = Vec::new();
    for i in 0..n {
        if solver.alpha[i] > 1e-12 {
            support_x.push(x[i].clone());
            alpha_y.push(solver.alpha[i] * target[i]);
        }
    }
    Ok(SvmModel {
        support_x,
        alpha_y,
        bias: solver.bias,
        kernel: params.kernel,
        gamma,
        c: params.c,
        num_features: x[0].len(),
    })
}

/// Dual-feasibility diagnostics: (max box violation, |sum alpha_i y_i|).
/// The box bound is enforced structurally, so the first value is how far
/// any alpha drifted outside [0, C] numerically.
pub fn dual_constraint_residuals(model: &SvmModel) -> (f64, f64) {
    let mut box_violation = 0.0f64;
    let mut sum = 0.0;
    for &ay in &model.alpha_y {
        let alpha = ay.abs();
        box_violation = box_violation.max((alpha - model.c).max(0.0));
        sum += ay;
    }
    (box_violation, sum.abs())
}

struct Smo<'a> {
    gram: &'a [Vec<f64>],
    target: &'a [f64],
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    /// E_i = f(x_i) - y_i, maintained incrementally.
    errors: Vec<f64>,
    bias: f64,
}

impl Smo<'_> {
    fn run(&mut self, max_passes: usize) {
        let n = self.alpha.len();
        let mut examine_all = true;
        for _ in 0..max_passes {
            let mut changed = 0;
            if examine_all {
                for i in 0..n {
                    changed += self.examine(i) as usize;
                }
            } else {
                for i in 0..n {
                    if self.is_non_bound(i) {
                        changed += self.examine(i) as usize;
                    }
                }
            }
            if examine_all {
                if changed == 0 {
                    break; // all KKT conditions hold within tol
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.target[i2];
        let a2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates = (r2 < -self.tol && a2 < self.c) || (r2 > self.tol && a2 > 0.0);
        if !violates {
            return false;
        }

        // Second choice: largest |E1 - E2| over non-bound multipliers.
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.alpha.len() {
            if i != i2 && self.is_non_bound(i) {
                let gap = (self.errors[i] - e2).abs();
                if best.map_or(true, |(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.step(i1, i2) {
                return true;
            }
        }
        // Fall back to scanning non-bound, then everything, in index order.
        for i1 in 0..self.alpha.len() {
            if i1 != i2 && self.is_non_bound(i1) && self.step(i1, i2) {
                return true;
            }
        }
        for i1 in 0..self.alpha.len() {
            if i1 != i2 && !self.is_non_bound(i1) && self.step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.target[i1], self.target[i2]);
        let (a1_old, a2_old) = (self.alpha[i1], self.alpha[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (lo, hi) = if s < 0.0 {
            ((a2_old - a1_old).max(0.0), (self.c + a2_old - a1_old).min(self.c))
        } else {
            ((a2_old + a1_old - self.c).max(0.0), (a2_old + a1_old).min(self.c))
        };
        if lo >= hi {
            return false;
        }

        let k11 = self.gram[i1][i1];
        let k22 = self.gram[i2][i2];
        let k12 = self.gram[i1][i2];
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            return false; // degenerate pair (duplicate points)
        }

        let mut a2 = a2_old + y2 * (e1 - e2) / eta;
        a2 = a2.clamp(lo, hi);
        if (a2 - a2_old).abs() < 1e-12 * (a2 + a2_old + 1e-12) {
            return false;
        }
        let a1 = a1_old + s * (a2_old - a2);

        // Bias update (Platt's b1/b2 rule).
        let b1 = self.bias - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12;
        let b2 = self.bias - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22;
        let new_bias = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let delta_b = new_bias - self.bias;

        let d1 = y1 * (a1 - a1_old);
        let d2 = y2 * (a2 - a2_old);
        for i in 0..self.errors.len() {
            self.errors[i] += d1 * self.gram[i1][i] + d2 * self.gram[i2][i] + delta_b;
        }
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        true
    }
}

impl SvmModel {
    /// Raw decision value sum(alpha_i y_i K(x_i, x)) + b.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.support_x
            .iter()
            .zip(&self.alpha_y)
            .map(|(sv, &ay)| ay * kernel_eval(self.kernel, self.gamma, sv, row))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.score_row(row) > 0.0)
    }
}
