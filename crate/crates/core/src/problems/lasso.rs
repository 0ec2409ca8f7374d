//! Sparse linear regression with a known planted support.
//!
//! The instance is `y = X theta* + eps` with standard-Gaussian design,
//! `theta*` equal to +-1 on a random size-`k` support and zero elsewhere,
//! and `eps ~ N(0, noise_sigma^2)`. The loss is `(1/2n) ||X theta - y||^2`
//! so gradients and Lipschitz estimates stay O(1) in the sample count.

use alloc::vec;
use alloc::vec::Vec;

use super::Problem;
use crate::error::CoreError;
use crate::math;
use crate::rng::RngStream;
use crate::ParamVector;

#[derive(Debug, Clone)]
pub struct LassoInstance {
    /// Design matrix, row-major `n x p`.
    x: Vec<f64>,
    y: Vec<f64>,
    theta_star: ParamVector,
    /// Sorted indices of the nonzero coordinates of `theta_star`.
    support: Vec<usize>,
    noise_sigma: f64,
    n: usize,
    p: usize,
}

/// Draws an instance. The support is a uniform size-`k` subset, each planted
/// coefficient is an independent fair +-1, and the noise draws come after
/// the design draws so instances with equal seeds share their design.
pub fn generate_lasso(
    p: usize,
    n: usize,
    k: usize,
    noise_sigma: f64,
    rng: &mut RngStream,
) -> Result<LassoInstance, CoreError> {
    if p == 0 || n == 0 {
        return Err(CoreError::config("lasso instance needs p >= 1 and n >= 1"));
    }
    if k == 0 || k > p {
        return Err(CoreError::config("sparsity k must satisfy 1 <= k <= p"));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(CoreError::config("noise sigma must be finite and >= 0"));
    }

    let x = rng.normal_vec(n * p, 1.0);
    let mut support = rng.sample_indices(p, k);
    support.sort_unstable();
    let mut theta = vec![0.0; p];
    for &j in &support {
        theta[j] = rng.pm_one();
    }
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let row = &x[i * p..(i + 1) * p];
        y.push(math::dot(row, &theta) + noise_sigma * rng.normal());
    }
    Ok(LassoInstance {
        x,
        y,
        theta_star: ParamVector::new(theta)?,
        support,
        noise_sigma,
        n,
        p,
    })
}

impl LassoInstance {
    pub fn theta_star(&self) -> &ParamVector {
        &self.theta_star
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn design_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    /// Power-iteration estimate of `L = lambda_max(X^T X / n)`, the gradient
    /// Lipschitz constant of the loss. Deterministic (starts from the
    /// all-ones direction).
    pub fn lipschitz_estimate(&self, iters: usize) -> f64 {
        let mut v = vec![1.0 / math::sqrt(self.p as f64); self.p];
        let mut eig = 0.0;
        for _ in 0..iters.max(1) {
            // w = (X^T (X v)) / n
            let xv: Vec<f64> = (0..self.n)
                .map(|i| math::dot(self.design_row(i), &v))
                .collect();
            let mut w = vec![0.0; self.p];
            for (i, &xvi) in xv.iter().enumerate() {
                let s = xvi / self.n as f64;
                for (wj, xj) in w.iter_mut().zip(self.design_row(i)) {
                    *wj += s * xj;
                }
            }
            let norm = math::l2_norm(&w);
            if norm == 0.0 {
                return 0.0;
            }
            eig = norm; // Rayleigh quotient for the unit vector v
            for (vj, wj) in v.iter_mut().zip(&w) {
                *vj = wj / norm;
            }
        }
        eig
    }
}

impl Problem for LassoInstance {
    fn dim(&self) -> usize {
        self.p
    }

    fn sample_count(&self) -> usize {
        self.n
    }

    fn minibatch_gradient(&self, theta: &[f64], batch: &[usize]) -> Vec<f64> {
        assert_eq!(theta.len(), self.p, "theta length mismatch");
        assert!(!batch.is_empty(), "empty minibatch");
        let mut g = vec![0.0; self.p];
        for &i in batch {
            let row = self.design_row(i);
            let r = math::dot(row, theta) - self.y[i];
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += r * xj;
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for gj in g.iter_mut() {
            *gj *= scale;
        }
        g
    }

    fn loss(&self, theta: &[f64], batch: Option<&[usize]>) -> f64 {
        let residual_sq = |i: usize| {
            let r = math::dot(self.design_row(i), theta) - self.y[i];
            r * r
        };
        match batch {
            Some(idx) => {
                assert!(!idx.is_empty(), "empty minibatch");
                idx.iter().map(|&i| residual_sq(i)).sum::<f64>() / (2.0 * idx.len() as f64)
            }
            None => (0..self.n).map(residual_sq).sum::<f64>() / (2.0 * self.n as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn instance_matches_its_invariants() {
        let inst = generate_lasso(50, 20, 5, 0.05, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(inst.support().len(), 5);
        for (j, &v) in inst.theta_star().iter().enumerate() {
            if inst.support().contains(&j) {
                assert!(v == 1.0 || v == -1.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn zero_noise_exact_fit_has_zero_gradient() {
        let inst = generate_lasso(30, 12, 4, 0.0, &mut RngStream::new(1, 0)).unwrap();
        let g = inst.full_gradient(inst.theta_star());
        assert!(g.iter().all(|v| v.abs() < 1e-12), "residual gradient {g:?}");
        assert!(inst.loss(inst.theta_star(), None) < 1e-24);
    }

    #[test]
    fn dense_boundary_instance_is_allowed() {
        let inst = generate_lasso(8, 64, 8, 0.05, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(inst.support().len(), 8);
        assert!(generate_lasso(8, 64, 9, 0.05, &mut RngStream::new(2, 0)).is_err());
    }

    #[test]
    fn minibatch_over_full_index_set_matches_full_gradient() {
        let inst = generate_lasso(25, 16, 3, 0.1, &mut RngStream::new(3, 0)).unwrap();
        let mut rng = RngStream::new(4, 0);
        let theta = rng.normal_vec(25, 1.0);
        let all: Vec<usize> = (0..16).collect();
        let a = inst.minibatch_gradient(&theta, &all);
        let b = inst.full_gradient(&theta);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn partition_mean_equals_full_gradient() {
        let inst = generate_lasso(25, 16, 3, 0.1, &mut RngStream::new(5, 0)).unwrap();
        let mut rng = RngStream::new(6, 0);
        let theta = rng.normal_vec(25, 1.0);
        let full = inst.full_gradient(&theta);
        let mut mean = [0.0; 25];
        for chunk in (0..16).collect::<Vec<_>>().chunks(4) {
            let g = inst.minibatch_gradient(&theta, chunk);
            for (m, v) in mean.iter_mut().zip(&g) {
                *m += v / 4.0;
            }
        }
        for (x, y) in mean.iter().zip(&full) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn lipschitz_estimate_dominates_random_rayleigh_quotients() {
        let inst = generate_lasso(40, 30, 5, 0.05, &mut RngStream::new(7, 0)).unwrap();
        let est = inst.lipschitz_estimate(200);
        assert!(est > 0.0);
        let mut rng = RngStream::new(8, 0);
        for _ in 0..20 {
            let v = rng.normal_vec(40, 1.0);
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let mut quad = 0.0;
            for i in 0..30 {
                let xv = math::dot(inst.design_row(i), &v);
                quad += xv * xv / 30.0;
            }
            assert!(quad / norm2 <= est * (1.0 + 1e-6));
        }
    }
}
