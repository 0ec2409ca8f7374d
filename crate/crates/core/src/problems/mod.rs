//! Desk-scale optimization problems driving the experiment harness.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::rng::RngStream;

mod lasso;
mod mlp;

pub use lasso::{generate_lasso, LassoInstance};
pub use mlp::{mlp_gradient, Activation, LossKind, MlpProblem, MlpSpec};

/// A differentiable empirical-risk objective over `sample_count` samples.
///
/// Implementations must be pure: the same `(theta, batch)` always yields the
/// same gradient, and the mean of per-sample gradients equals the full
/// gradient (the unbiasedness witness used by the condition monitors).
pub trait Problem: Sync {
    /// Parameter dimension `p`.
    fn dim(&self) -> usize;

    /// Number of data samples `n`.
    fn sample_count(&self) -> usize;

    /// Mean gradient over the given sample indices.
    fn minibatch_gradient(&self, theta: &[f64], batch: &[usize]) -> Vec<f64>;

    /// Mean gradient over all samples.
    fn full_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.sample_count()).collect();
        self.minibatch_gradient(theta, &all)
    }

    /// Mean loss over `batch`, or over all samples when `batch` is `None`.
    fn loss(&self, theta: &[f64], batch: Option<&[usize]>) -> f64;
}

/// A labeled classification dataset with dense features, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub input_dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        let d = self.input_dim;
        (&self.features[i * d..(i + 1) * d], self.labels[i])
    }

    pub fn classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Splits off the first `count` samples (e.g. a train/test split of one
    /// generated pool, so both halves share the same class geometry).
    pub fn split_at(mut self, count: usize) -> (Dataset, Dataset) {
        assert!(count <= self.len(), "split point beyond dataset");
        let tail_features = self.features.split_off(count * self.input_dim);
        let tail_labels = self.labels.split_off(count);
        let head = Dataset {
            features: self.features,
            labels: self.labels,
            input_dim: self.input_dim,
        };
        let tail = Dataset {
            features: tail_features,
            labels: tail_labels,
            input_dim: self.input_dim,
        };
        (head, tail)
    }
}

/// Gaussian class clusters with unit within-class noise. Class centers are
/// drawn on the sphere of radius `separation` and re-drawn until they are at
/// least `separation` apart, so `separation >> 1` gives a linearly separable
/// dataset. Labels cycle through the classes; everything is deterministic
/// under the stream.
pub fn generate_blobs(
    n: usize,
    input_dim: usize,
    classes: usize,
    separation: f64,
    rng: &mut RngStream,
) -> Result<Dataset, CoreError> {
    if n == 0 {
        return Err(CoreError::config("dataset must contain at least one sample"));
    }
    if classes < 2 {
        return Err(CoreError::config("need at least two classes"));
    }
    if input_dim == 0 {
        return Err(CoreError::config("input_dim must be >= 1"));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(CoreError::config("separation must be finite and >= 0"));
    }

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut attempts = 0;
        loop {
            let raw = rng.normal_vec(input_dim, 1.0);
            let norm = crate::math::l2_norm(&raw);
            if norm == 0.0 {
                continue;
            }
            let center: Vec<f64> = raw.iter().map(|v| v / norm * separation).collect();
            let far_enough = centers.iter().all(|c| {
                let d2: f64 = c
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                crate::math::sqrt(d2) >= separation
            });
            attempts += 1;
            if far_enough || attempts > 64 {
                centers.push(center);
                break;
            }
        }
    }

    let mut features = Vec::with_capacity(n * input_dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % classes;
        for &c in &centers[label] {
            features.push(c + rng.normal());
        }
        labels.push(label);
    }
    Ok(Dataset {
        features,
        labels,
        input_dim,
    })
}
