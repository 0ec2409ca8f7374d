//! Computable witnesses for the optimizer's convergence theory:
//! stationarity bounds, condition monitors, support-recovery metrics and
//! rate trends.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::optim::{StepOutcome, StepperConfig};
use crate::precond::{MomentumState, PrecondState};
use crate::problems::Problem;
use crate::ParamVector;

/// One diagnostics row of an optimization run.
///
/// `max_grad_norm` is the running maximum of the minibatch gradient norm
/// over ALL iterations up to `t` (not only recorded ones), which is what the
/// momentum bound and the adaptive-metric eigenvalue bound are stated
/// against. `grad_variance` is the empirical variance of disjoint-minibatch
/// gradients around the full gradient at the snapshot point (the
/// bounded-variance witness).
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: u64,
    /// Full objective `f(theta) + lambda_t * R(theta)`.
    pub objective: f64,
    pub stationarity_bound: f64,
    /// Fraction of exactly-zero coordinates.
    pub sparsity: f64,
    pub support_precision: Option<f64>,
    pub support_recall: Option<f64>,
    pub support_f1: Option<f64>,
    pub momentum_norm: f64,
    pub grad_norm: f64,
    pub max_grad_norm: f64,
    pub grad_variance: f64,
    /// `min_i alpha_t / (C_i + delta)` at this iteration.
    pub c4_min_eig: f64,
    /// `||theta_{t+1} - theta_t||_2`.
    pub step_norm: f64,
}

/// Norm of the subgradient witness
///
/// ```text
/// grad f(theta_{t+1}) - (1 - rho_t) g_t - rho_t m_{t-1}
///     - (1/alpha_t) (C_t + delta I)(theta_{t+1} - theta_base)
/// ```
///
/// which is a member of the generalized subdifferential of the penalized
/// objective at `theta_{t+1}` for the proximal steppers, hence an upper
/// bound on the distance from stationarity. Uses the full gradient.
pub fn stationarity_bound(
    outcome: &StepOutcome,
    problem: &dyn Problem,
    rho_t: f64,
    alpha_t: f64,
) -> f64 {
    let full_grad = problem.full_gradient(&outcome.theta_next);
    witness_norm(outcome, &full_grad, rho_t, alpha_t)
}

fn witness_norm(outcome: &StepOutcome, full_grad: &[f64], rho_t: f64, alpha_t: f64) -> f64 {
    let mut sq = 0.0;
    for (i, &grad_i) in full_grad.iter().enumerate() {
        let metric_term =
            outcome.effective_diag[i] * (outcome.theta_next[i] - outcome.theta_base[i]) / alpha_t;
        let w = grad_i
            - (1.0 - rho_t) * outcome.gradient[i]
            - rho_t * outcome.momentum_prev[i]
            - metric_term;
        sq += w * w;
    }
    math::sqrt(sq)
}

/// Precision, recall and F1 of the exact-zero support pattern against the
/// true support. An empty predicted support has precision 1 when the true
/// support is empty and 0 otherwise; an empty true support gives recall 1.
pub fn support_metrics(theta: &[f64], true_support: &[usize]) -> (f64, f64, f64) {
    let predicted: Vec<usize> = theta
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect();
    let true_positives = predicted
        .iter()
        .filter(|i| true_support.contains(i))
        .count();

    let precision = if predicted.is_empty() {
        if true_support.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        true_positives as f64 / predicted.len() as f64
    };
    let recall = if true_support.is_empty() {
        1.0
    } else {
        true_positives as f64 / true_support.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// Report of the max/min witnesses over a run history. Pure reporting; the
/// monitors never abort a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Max `||theta_{t+1} - theta_t||` vs the step-vector bound `D`.
    pub max_step_norm: f64,
    pub step_norm_ok: bool,
    /// Max gradient norm (over all iterations) vs the gradient bound `G`.
    pub max_grad_norm: f64,
    pub grad_norm_ok: bool,
    /// Min `lambda_min(alpha_t (C_t + delta I)^{-1})` vs the floor `gamma`.
    pub min_c4_eig: f64,
    pub c4_ok: bool,
    /// Largest empirical minibatch-gradient variance seen at a snapshot.
    pub max_grad_variance: f64,
}

/// Exact extrema of the recorded fields against the requested bounds.
pub fn monitor_conditions(
    history: &[RunRecord],
    gamma_target: f64,
    d_target: f64,
    g_target: f64,
) -> Result<ConditionReport, CoreError> {
    if history.is_empty() {
        return Err(CoreError::config("monitor_conditions needs a nonempty history"));
    }
    let max_step_norm = history.iter().map(|r| r.step_norm).fold(0.0, f64::max);
    let max_grad_norm = history.iter().map(|r| r.max_grad_norm).fold(0.0, f64::max);
    let min_c4_eig = history
        .iter()
        .map(|r| r.c4_min_eig)
        .fold(f64::INFINITY, f64::min);
    let max_grad_variance = history.iter().map(|r| r.grad_variance).fold(0.0, f64::max);
    Ok(ConditionReport {
        max_step_norm,
        step_norm_ok: max_step_norm <= d_target,
        max_grad_norm,
        grad_norm_ok: max_grad_norm <= g_target,
        min_c4_eig,
        c4_ok: min_c4_eig >= gamma_target,
        max_grad_variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendFlag {
    /// The running mean of squared bounds decays at least like 1/T.
    ConsistentWithRate,
    /// Bounded up to a slowly growing factor (e.g. squared bounds ~ 1/t).
    Borderline,
    /// The ratio series keeps growing; no decay evident.
    NonConvergent,
}

/// Decay summary of a stationarity-bound series.
///
/// `ratio[k] = mean(bound[..=k]^2) * (k+1) = sum of squared bounds`, the
/// quantity that stays bounded exactly when the mean squared bound is
/// O(1/T). `growth` compares the final ratio against the ratio at half the
/// series; 2.0 for a constant series, ~1 for a convergent one.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTrend {
    pub ratio: Vec<f64>,
    pub final_ratio: f64,
    pub half_ratio: f64,
    pub growth: f64,
    /// Least-squares slope of log(ratio) vs log(index) over the second half.
    pub log_slope: f64,
    pub flag: TrendFlag,
}

const TREND_NON_CONVERGENT: f64 = 1.5;
const TREND_BORDERLINE: f64 = 1.05;

pub fn rate_trend(bounds: &[f64]) -> Result<RateTrend, CoreError> {
    if bounds.len() < 10 {
        return Err(CoreError::config("rate_trend needs at least 10 bounds"));
    }
    let mut ratio = Vec::with_capacity(bounds.len());
    let mut acc = 0.0;
    for b in bounds {
        acc += b * b;
        ratio.push(acc);
    }
    let final_ratio = ratio[ratio.len() - 1];
    let half_ratio = ratio[ratio.len() / 2 - 1];
    let growth = if half_ratio > 0.0 {
        final_ratio / half_ratio
    } else if final_ratio > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };

    let start = ratio.len() / 2;
    let pts: Vec<(f64, f64)> = (start..ratio.len())
        .filter(|&i| ratio[i] > 0.0)
        .map(|i| (math::ln((i + 1) as f64), math::ln(ratio[i])))
        .collect();
    let log_slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        if var > 0.0 {
            cov / var
        } else {
            0.0
        }
    } else {
        0.0
    };

    let flag = if growth >= TREND_NON_CONVERGENT {
        TrendFlag::NonConvergent
    } else if growth > TREND_BORDERLINE {
        TrendFlag::Borderline
    } else {
        TrendFlag::ConsistentWithRate
    };
    Ok(RateTrend {
        ratio,
        final_ratio,
        half_ratio,
        growth,
        log_slope,
        flag,
    })
}

/// Builds one diagnostics row. Called by the run loop; kept here so the
/// definition of every recorded quantity lives next to its consumers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn collect_record(
    t: u64,
    theta: &ParamVector,
    outcome: &StepOutcome,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &MomentumState,
    precond: &PrecondState,
    grad_norm: f64,
    max_grad_norm: f64,
    step_norm: f64,
    true_support: Option<&[usize]>,
) -> RunRecord {
    let alpha_t = cfg.step.value(t);
    let rho_t = cfg.momentum.value(t);
    let lambda_t = cfg.regularizer.lambda_at(t);
    let objective = problem.loss(theta, None) + lambda_t * cfg.regularizer.penalty(theta);
    let bound = stationarity_bound(outcome, problem, rho_t, alpha_t);
    let (_, c4_min_eig) = precond.check_c4(alpha_t, 0.0);
    let (support_precision, support_recall, support_f1) = match true_support {
        Some(sup) => {
            let (p, r, f) = support_metrics(theta, sup);
            (Some(p), Some(r), Some(f))
        }
        None => (None, None, None),
    };
    RunRecord {
        t,
        objective,
        stationarity_bound: bound,
        sparsity: theta.sparsity(),
        support_precision,
        support_recall,
        support_f1,
        momentum_norm: momentum.l2_norm(),
        grad_norm,
        max_grad_norm,
        grad_variance: minibatch_variance(problem, theta, cfg.batch_size),
        c4_min_eig,
        step_norm,
    }
}

/// Empirical variance of disjoint-minibatch gradients around the full
/// gradient at a fixed point: mean over full batches of `||g_S - g||^2`.
/// Zero when a single batch covers the data.
pub fn minibatch_variance(problem: &dyn Problem, theta: &[f64], batch_size: usize) -> f64 {
    let n = problem.sample_count();
    let b = batch_size.max(1);
    if b >= n {
        return 0.0;
    }
    let full = problem.full_gradient(theta);
    let batches = n / b;
    let mut acc = 0.0;
    for k in 0..batches {
        let idx: Vec<usize> = (k * b..(k + 1) * b).collect();
        let g = problem.minibatch_gradient(theta, &idx);
        acc += g
            .iter()
            .zip(&full)
            .map(|(a, f)| (a - f) * (a - f))
            .sum::<f64>();
    }
    acc / batches as f64
}
