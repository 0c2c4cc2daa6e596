//! Brute-force k-nearest-neighbor voting with Minkowski distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnnWeights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<u8>,
    pub k: usize,
    pub weights: KnnWeights,
    /// Minkowski exponent, 1 or 2.
    pub p: u32,
}

pub fn knn_fit(
    x: &[Vec<f64>],
    y: &[u8],
    k: usize,
    weights: KnnWeights,
    p: u32,
) -> Result<KnnModel> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > x.len() {
        return Err(Error::InvalidInput(format!("k={k} exceeds {} training rows", x.len())));
    }
    if !(p == 1 || p == 2) {
        return Err(Error::InvalidInput("Minkowski p must be 1 or 2".into()));
    }
    Ok(KnnModel { train_x: x.to_vec(), train_y: y.to_vec(), k, weights, p })
}

impl KnnModel {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.p {
            1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            _ => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Indices of the k nearest rows, distance ties broken by the lower
    /// row index.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut order: Vec<(f64, usize)> = self
            .train_x
            .iter()
            .enumerate()
            .map(|(i, row)| (self.distance(query, row), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order[..self.k].iter().map(|&(_, i)| i).collect()
    }

    /// Weighted positive-class vote fraction.
    pub fn score_row(&self, query: &[f64]) -> f64 {
        let mut pos = 0.0;
        let mut total = 0.0;
        for i in self.neighbors(query) {
            let w = match self.weights {
                KnnWeights::Uniform => 1.0,
                KnnWeights::Distance => 1.0 / (self.distance(query, &self.train_x[i]) + 1e-12),
            };
            total += w;
            if self.train_y[i] == 1 {
                pos += w;
            }
        }
        pos / total
    }

    pub fn predict_row(&self, query: &[f64]) -> u8 {
        u8::from(self.score_row(query) > 0.5)
    }
}
