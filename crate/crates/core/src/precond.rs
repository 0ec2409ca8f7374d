//! First-order momentum and diagonal preconditioner state.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, CoreError};
use crate::math;

/// EMA gradient estimate `m_t = rho_t * m_{t-1} + (1 - rho_t) * g_t`,
/// initialized to zero.
#[derive(Debug, Clone)]
pub struct MomentumState {
    m: Vec<f64>,
    steps: u64,
}

impl MomentumState {
    pub fn zeros(dim: usize) -> Self {
        MomentumState {
            m: vec![0.0; dim],
            steps: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.m
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn l2_norm(&self) -> f64 {
        math::l2_norm(&self.m)
    }

    pub fn update(&mut self, g: &[f64], rho_t: f64) -> Result<(), CoreError> {
        check_len(self.m.len(), g.len())?;
        debug_assert!((0.0..1.0).contains(&rho_t));
        for (m, &gi) in self.m.iter_mut().zip(g) {
            *m = rho_t * *m + (1.0 - rho_t) * gi;
        }
        self.steps += 1;
        Ok(())
    }
}

/// Which diagonal preconditioner the stepper uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecondKind {
    /// `C = I`; the effective metric is `(1 + delta) I`.
    Identity,
    /// Time-normalized AdaGrad diagonal: `C_t = sqrt((1/t) sum g^2)`.
    AdaGrad,
    /// EMA of squared gradients: `C_t = sqrt(beta * C_{t-1}^2 + (1-beta) * g^2)`
    /// (the undebiased Adam/RMSprop diagonal).
    AdamEma { beta: f64 },
}

impl PrecondKind {
    pub fn token(self) -> &'static str {
        match self {
            PrecondKind::Identity => "identity",
            PrecondKind::AdaGrad => "adagrad",
            PrecondKind::AdamEma { .. } => "adam-ema",
        }
    }
}

/// Diagonal preconditioner state. The accumulator holds running sums or the
/// EMA of squared gradients; `C` is derived on read as its square root so
/// repeated updates never compound square-root round-off.
#[derive(Debug, Clone)]
pub struct PrecondState {
    kind: PrecondKind,
    delta: f64,
    accum: Vec<f64>,
    steps: u64,
}

impl PrecondState {
    /// `delta` is the damping added to the diagonal; it must be positive
    /// except for the identity kind, whose metric is already bounded away
    /// from zero.
    pub fn new(kind: PrecondKind, delta: f64, dim: usize) -> Result<Self, CoreError> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(CoreError::config("delta must be finite and >= 0"));
        }
        if delta == 0.0 && !matches!(kind, PrecondKind::Identity) {
            return Err(CoreError::config(
                "delta must be > 0 for adagrad/adam-ema preconditioners",
            ));
        }
        if let PrecondKind::AdamEma { beta } = kind {
            if !(0.0..1.0).contains(&beta) {
                return Err(CoreError::config("beta must lie in [0, 1)"));
            }
        }
        Ok(PrecondState {
            kind,
            delta,
            accum: vec![0.0; dim],
            steps: 0,
        })
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.accum.len()
    }

    pub fn update(&mut self, g: &[f64]) -> Result<(), CoreError> {
        check_len(self.accum.len(), g.len())?;
        match self.kind {
            PrecondKind::Identity => {}
            PrecondKind::AdaGrad => {
                for (a, &gi) in self.accum.iter_mut().zip(g) {
                    *a += gi * gi;
                }
            }
            PrecondKind::AdamEma { beta } => {
                for (a, &gi) in self.accum.iter_mut().zip(g) {
                    *a = beta * *a + (1.0 - beta) * gi * gi;
                }
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Diagonal entry `C_i` (before damping).
    pub fn c_value(&self, i: usize) -> f64 {
        match self.kind {
            PrecondKind::Identity => 1.0,
            PrecondKind::AdaGrad => {
                if self.steps == 0 {
                    0.0
                } else {
                    math::sqrt(self.accum[i] / self.steps as f64)
                }
            }
            PrecondKind::AdamEma { .. } => math::sqrt(self.accum[i]),
        }
    }

    /// `C + delta` per coordinate; strictly positive for every valid state.
    pub fn effective_diag(&self) -> Vec<f64> {
        (0..self.accum.len())
            .map(|i| self.c_value(i) + self.delta)
            .collect()
    }

    /// Minimum eigenvalue of `alpha_t (C_t + delta I)^{-1}` — for a diagonal
    /// metric this is `min_i alpha_t / (C_i + delta)` — and whether it stays
    /// above the requested floor.
    pub fn check_c4(&self, alpha_t: f64, gamma_target: f64) -> (bool, f64) {
        debug_assert!(alpha_t > 0.0);
        let mut observed = f64::INFINITY;
        for i in 0..self.accum.len() {
            let v = alpha_t / (self.c_value(i) + self.delta);
            if v < observed {
                observed = v;
            }
        }
        (observed >= gamma_target, observed)
    }
}
