//! Optimizer steppers and the run loop.
//!
//! Every stepper performs, per iteration: draw a minibatch, evaluate the
//! stochastic gradient, update the momentum estimate, update the diagonal
//! preconditioner, then apply its method-specific parameter map. Keeping the
//! shared machinery identical across methods makes the baselines directly
//! comparable on matched RNG streams.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diagnostics::{self, RunRecord};
use crate::error::{check_len, CoreError};
use crate::math;
use crate::precond::{MomentumState, PrecondKind, PrecondState};
use crate::problems::Problem;
use crate::prox::{self, Exponent, Family, RegularizerSpec};
use crate::rng::RngStream;
use crate::schedule::{MomentumSchedule, StepSchedule};
use crate::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Preconditioned proximal step in the metric `C_t + delta I`.
    ProxGen,
    /// ProxGen with decoupled weight decay applied before the prox step.
    ProxGenW,
    /// Two-stage baseline: solve the subproblem without the stepsize, then
    /// interpolate `theta + alpha * (theta_hat - theta)`.
    ProxSgd,
    /// Penalty handled through its (formal) subgradient.
    Subgradient,
    /// Quantization baseline: preconditioned gradient step, Euclidean prox.
    ProxQuantOriginal,
}

impl Method {
    pub fn token(self) -> &'static str {
        match self {
            Method::ProxGen => "proxgen",
            Method::ProxGenW => "proxgen-w",
            Method::ProxSgd => "prox-sgd",
            Method::Subgradient => "subgradient",
            Method::ProxQuantOriginal => "proxquant-original",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub method: Method,
    pub step: StepSchedule,
    pub momentum: MomentumSchedule,
    pub regularizer: RegularizerSpec,
    pub precond: PrecondKind,
    pub delta: f64,
    /// Decoupled weight decay `zeta`; only meaningful for [`Method::ProxGenW`].
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_iters: u64,
    /// Snap every coordinate to +-1 after this iteration's step (quant-lq only).
    pub hard_quantize_at: Option<u64>,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.batch_size == 0 {
            return Err(CoreError::config("batch_size must be >= 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(CoreError::config("weight_decay must be finite and >= 0"));
        }
        if self.weight_decay > 0.0 && self.method != Method::ProxGenW {
            return Err(CoreError::config(
                "weight_decay > 0 requires the proxgen-w method",
            ));
        }
        if self.hard_quantize_at.is_some() && self.regularizer.family != Family::QuantLq {
            return Err(CoreError::config(
                "hard_quantize_at requires a quant-lq regularizer",
            ));
        }
        if self.method == Method::Subgradient && self.regularizer.q == Exponent::Zero {
            return Err(CoreError::config(
                "the l0 penalty has no subgradient; use a proximal method",
            ));
        }
        if self.method == Method::ProxQuantOriginal && self.regularizer.family != Family::QuantLq {
            return Err(CoreError::config(
                "proxquant-original applies only to quant-lq regularizers",
            ));
        }
        // delta = 0 is allowed only when the metric is already the identity.
        PrecondState::new(self.precond, self.delta, 1).map(|_| ())
    }
}

/// Everything one step produces, including the witnesses the stationarity
/// bound needs: the minibatch gradient, the pre-update momentum, the metric
/// diagonal and the point the prox subproblem was centered at.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub theta_next: ParamVector,
    pub gradient: Vec<f64>,
    pub momentum_prev: Vec<f64>,
    /// Quadratic center of the subproblem: `theta_t`, or the decayed
    /// `(1 - alpha*zeta) * theta_t` for proxgen-w.
    pub theta_base: Vec<f64>,
    /// Effective metric diagonal `C_t + delta` used by this step.
    pub effective_diag: Vec<f64>,
}

/// Shared per-step plumbing: minibatch draw, gradient, momentum and
/// preconditioner updates (in that order).
fn advance_states(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    check_len(problem.dim(), theta.len())?;
    let batch = rng.sample_indices(problem.sample_count(), cfg.batch_size);
    let gradient = problem.minibatch_gradient(theta, &batch);
    if !math::all_finite(&gradient) {
        return Err(CoreError::NonFinite { what: "gradient", t });
    }
    let momentum_prev = momentum.values().to_vec();
    momentum.update(&gradient, cfg.momentum.value(t))?;
    precond.update(&gradient)?;
    Ok((gradient, momentum_prev))
}

#[allow(clippy::too_many_arguments)]
fn prox_step(
    theta_base: Vec<f64>,
    gradient: Vec<f64>,
    momentum_prev: Vec<f64>,
    momentum: &MomentumState,
    precond: &PrecondState,
    cfg: &StepperConfig,
    t: u64,
    unit_metric_prox: bool,
) -> Result<StepOutcome, CoreError> {
    let alpha = cfg.step.value(t);
    let diag = precond.effective_diag();
    let mut theta_hat = Vec::with_capacity(theta_base.len());
    for ((&base, &m), &kappa) in theta_base.iter().zip(momentum.values()).zip(&diag) {
        theta_hat.push(base - alpha * m / kappa);
    }
    let theta_hat = ParamVector::from_vec_unchecked(theta_hat);
    let theta_next = if unit_metric_prox {
        let ones = alloc::vec![1.0; theta_hat.len()];
        prox::prox_vector(&theta_hat, &ones, alpha, &cfg.regularizer, t)?
    } else {
        prox::prox_vector(&theta_hat, &diag, alpha, &cfg.regularizer, t)?
    };
    Ok(StepOutcome {
        theta_next,
        gradient,
        momentum_prev,
        theta_base,
        effective_diag: diag,
    })
}

/// One preconditioned proximal step: gradient step in the damped metric,
/// then the prox of the regularizer in the same metric.
pub fn step_proxgen(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<StepOutcome, CoreError> {
    let (g, m_prev) = advance_states(theta, problem, cfg, momentum, precond, t, rng)?;
    prox_step(
        theta.as_slice().to_vec(),
        g,
        m_prev,
        momentum,
        precond,
        cfg,
        t,
        false,
    )
}

/// ProxGen with decoupled weight decay: the prox step is centered at
/// `(1 - alpha_t * zeta) * theta_t` instead of `theta_t`.
pub fn step_proxgen_w(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<StepOutcome, CoreError> {
    let (g, m_prev) = advance_states(theta, problem, cfg, momentum, precond, t, rng)?;
    let shrink = 1.0 - cfg.step.value(t) * cfg.weight_decay;
    let base: Vec<f64> = theta.iter().map(|&v| shrink * v).collect();
    prox_step(base, g, m_prev, momentum, precond, cfg, t, false)
}

/// Two-stage baseline: `theta_hat` solves the subproblem without the
/// stepsize (equivalently a prox with alpha = 1 in both the gradient step
/// and the penalty weight), and the iterate moves by interpolation
/// `theta + alpha * (theta_hat - theta)`, which cannot produce exact zeros
/// from a nonzero coordinate while alpha < 1.
pub fn step_prox_sgd(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<StepOutcome, CoreError> {
    let (g, m_prev) = advance_states(theta, problem, cfg, momentum, precond, t, rng)?;
    let diag = precond.effective_diag();
    let mut subproblem_center = Vec::with_capacity(theta.len());
    for ((&v, &m), &kappa) in theta.iter().zip(momentum.values()).zip(&diag) {
        subproblem_center.push(v - m / kappa);
    }
    let theta_hat = prox::prox_vector(
        &ParamVector::from_vec_unchecked(subproblem_center),
        &diag,
        1.0,
        &cfg.regularizer,
        t,
    )?;
    let alpha = cfg.step.value(t);
    let next: Vec<f64> = theta
        .iter()
        .zip(theta_hat.iter())
        .map(|(&v, &h)| v + alpha * (h - v))
        .collect();
    Ok(StepOutcome {
        theta_next: ParamVector::from_vec_unchecked(next),
        gradient: g,
        momentum_prev: m_prev,
        theta_base: theta.as_slice().to_vec(),
        effective_diag: diag,
    })
}

/// Formal (sub)derivative of the penalty at one coordinate, with the
/// minimal-norm convention 0 at non-differentiable points.
pub fn penalty_subgradient(family: Family, q: Exponent, x: f64) -> f64 {
    let shifted = match family {
        Family::SparseLq => x,
        Family::QuantLq => x - math::sign(x),
    };
    match q {
        Exponent::Zero => unreachable!("l0 rejected at validation"),
        Exponent::One => math::sign(shifted),
        _ => {
            if shifted == 0.0 {
                0.0
            } else {
                let qv = q.value();
                qv * math::sign(shifted) / math::pow(shifted.abs(), 1.0 - qv)
            }
        }
    }
}

/// Subgradient baseline: a single preconditioned step on the penalized
/// objective, `theta - alpha * (m + lambda * dR(theta)) / (C + delta)`.
pub fn step_subgradient(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<StepOutcome, CoreError> {
    let (g, m_prev) = advance_states(theta, problem, cfg, momentum, precond, t, rng)?;
    let alpha = cfg.step.value(t);
    let lambda = cfg.regularizer.lambda_at(t);
    let diag = precond.effective_diag();
    let mut next = Vec::with_capacity(theta.len());
    for ((&v, &m), &kappa) in theta.iter().zip(momentum.values()).zip(&diag) {
        let dr = if lambda == 0.0 {
            0.0
        } else {
            penalty_subgradient(cfg.regularizer.family, cfg.regularizer.q, v)
        };
        next.push(v - alpha * (m + lambda * dr) / kappa);
    }
    Ok(StepOutcome {
        theta_next: ParamVector::from_vec_unchecked(next),
        gradient: g,
        momentum_prev: m_prev,
        theta_base: theta.as_slice().to_vec(),
        effective_diag: diag,
    })
}

/// Quantization baseline: identical gradient step, but the prox is taken in
/// the Euclidean metric (unit weights) instead of `C_t + delta I`.
pub fn step_proxquant_original(
    theta: &ParamVector,
    problem: &dyn Problem,
    cfg: &StepperConfig,
    momentum: &mut MomentumState,
    precond: &mut PrecondState,
    t: u64,
    rng: &mut RngStream,
) -> Result<StepOutcome, CoreError> {
    let (g, m_prev) = advance_states(theta, problem, cfg, momentum, precond, t, rng)?;
    prox_step(
        theta.as_slice().to_vec(),
        g,
        m_prev,
        momentum,
        precond,
        cfg,
        t,
        true,
    )
}

/// Coordinate-wise sign snap with sign(0) = +1. Idempotent on +-1 vectors.
pub fn hard_quantize(theta: &ParamVector) -> ParamVector {
    ParamVector::from_vec_unchecked(
        theta
            .iter()
            .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The run was aborted; partial records are preserved.
    Diverged { at: u64, reason: String },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub theta: ParamVector,
    pub status: RunStatus,
}

/// Options for [`run`] that are not part of the stepper configuration.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions<'a> {
    /// Record diagnostics every this many iterations (the final iteration is
    /// always recorded). Must be >= 1.
    pub diagnostics_every: u64,
    /// True support for support-recovery columns (sparse problems only).
    pub true_support: Option<&'a [usize]>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        RunOptions {
            diagnostics_every: 100,
            true_support: None,
        }
    }
}

/// Executes `cfg.max_iters` steps of the configured method from `theta0`.
///
/// Diagnostics are recorded every `diagnostics_every` iterations (plus the
/// final one); a non-finite gradient or iterate aborts the run, preserving
/// the records collected so far. `max_iters = 0` returns `theta0` untouched.
pub fn run(
    problem: &dyn Problem,
    cfg: &StepperConfig,
    theta0: ParamVector,
    rng: &mut RngStream,
    opts: &RunOptions,
) -> Result<RunResult, CoreError> {
    cfg.validate()?;
    check_len(problem.dim(), theta0.len())?;
    if opts.diagnostics_every == 0 {
        return Err(CoreError::config("diagnostics_every must be >= 1"));
    }

    let p = theta0.len();
    let mut momentum = MomentumState::zeros(p);
    let mut precond = PrecondState::new(cfg.precond, cfg.delta, p)?;
    let mut theta = theta0;
    let mut records = Vec::new();
    let mut max_grad_norm: f64 = 0.0;

    for t in 1..=cfg.max_iters {
        let stepped = match cfg.method {
            Method::ProxGen => step_proxgen(&theta, problem, cfg, &mut momentum, &mut precond, t, rng),
            Method::ProxGenW => {
                step_proxgen_w(&theta, problem, cfg, &mut momentum, &mut precond, t, rng)
            }
            Method::ProxSgd => {
                step_prox_sgd(&theta, problem, cfg, &mut momentum, &mut precond, t, rng)
            }
            Method::Subgradient => {
                step_subgradient(&theta, problem, cfg, &mut momentum, &mut precond, t, rng)
            }
            Method::ProxQuantOriginal => {
                step_proxquant_original(&theta, problem, cfg, &mut momentum, &mut precond, t, rng)
            }
        };
        let outcome = match stepped {
            Ok(o) => o,
            Err(CoreError::NonFinite { what, t }) => {
                return Ok(RunResult {
                    records,
                    theta,
                    status: RunStatus::Diverged {
                        at: t,
                        reason: format!("non-finite {what}"),
                    },
                });
            }
            Err(e) => return Err(e),
        };
        if !outcome.theta_next.all_finite() {
            return Ok(RunResult {
                records,
                theta,
                status: RunStatus::Diverged {
                    at: t,
                    reason: String::from("non-finite iterate"),
                },
            });
        }

        let grad_norm = math::l2_norm(&outcome.gradient);
        max_grad_norm = max_grad_norm.max(grad_norm);
        let step_norm = math::l2_norm(
            &theta
                .iter()
                .zip(outcome.theta_next.iter())
                .map(|(a, b)| b - a)
                .collect::<Vec<f64>>(),
        );

        theta = outcome.theta_next.clone();
        if cfg.hard_quantize_at == Some(t) {
            theta = hard_quantize(&theta);
        }

        if t % opts.diagnostics_every == 0 || t == cfg.max_iters {
            let record = diagnostics::collect_record(
                t,
                &theta,
                &outcome,
                problem,
                cfg,
                &momentum,
                &precond,
                grad_norm,
                max_grad_norm,
                step_norm,
                opts.true_support,
            );
            records.push(record);
        }
    }

    Ok(RunResult {
        records,
        theta,
        status: RunStatus::Completed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_lasso, LassoInstance};
    use crate::prox::prox_oracle_1d;
    use crate::schedule::LambdaSchedule;
    use approx::assert_abs_diff_eq;

    fn base_cfg(method: Method, lambda: f64) -> StepperConfig {
        StepperConfig {
            method,
            step: StepSchedule::constant(0.1).unwrap(),
            momentum: MomentumSchedule::constant(0.0).unwrap(),
            regularizer: RegularizerSpec::new(
                Family::SparseLq,
                Exponent::One,
                LambdaSchedule::constant(lambda).unwrap(),
            ),
            precond: PrecondKind::Identity,
            delta: 0.0,
            weight_decay: 0.0,
            batch_size: 1_000_000,
            max_iters: 1,
            hard_quantize_at: None,
        }
    }

    /// f(theta) = theta^2 / 2 over a single synthetic "sample".
    struct Quadratic1D;

    impl Problem for Quadratic1D {
        fn dim(&self) -> usize {
            1
        }
        fn sample_count(&self) -> usize {
            1
        }
        fn minibatch_gradient(&self, theta: &[f64], _batch: &[usize]) -> Vec<f64> {
            alloc::vec![theta[0]]
        }
        fn loss(&self, theta: &[f64], _batch: Option<&[usize]>) -> f64 {
            0.5 * theta[0] * theta[0]
        }
    }

    #[test]
    fn proxgen_hand_example_on_quadratic() {
        // theta0 = 2, alpha = 0.1, lambda = 1, identity, delta = 0:
        // theta1 = soft(2 - 0.2, 0.1) = 1.7
        let cfg = base_cfg(Method::ProxGen, 1.0);
        let mut mom = MomentumState::zeros(1);
        let mut pre = PrecondState::new(PrecondKind::Identity, 0.0, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        let theta = ParamVector::new(alloc::vec![2.0]).unwrap();
        let out = step_proxgen(&theta, &Quadratic1D, &cfg, &mut mom, &mut pre, 1, &mut rng).unwrap();
        assert_abs_diff_eq!(out.theta_next[0], 1.7, epsilon = 1e-15);
        // cross-check with the brute-force oracle on the same subproblem
        let oracle = prox_oracle_1d(1.8, 2.0 * 0.1 * 1.0, |x| x.abs());
        assert_abs_diff_eq!(out.theta_next[0], oracle, epsilon = 1e-6);
    }

    #[test]
    fn proxgen_lambda_zero_is_plain_sgd() {
        let cfg = base_cfg(Method::ProxGen, 0.0);
        let mut mom = MomentumState::zeros(1);
        let mut pre = PrecondState::new(PrecondKind::Identity, 0.0, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        let theta = ParamVector::new(alloc::vec![2.0]).unwrap();
        let out = step_proxgen(&theta, &Quadratic1D, &cfg, &mut mom, &mut pre, 1, &mut rng).unwrap();
        assert_eq!(out.theta_next[0], 2.0 - 0.1 * 2.0);
    }

    #[test]
    fn proxgen_w_reductions() {
        // zeta = 0 reproduces step_proxgen on the same stream
        let mut cfg = base_cfg(Method::ProxGenW, 0.5);
        let theta = ParamVector::new(alloc::vec![2.0]).unwrap();
        let run_one = |cfg: &StepperConfig, w: bool| {
            let mut mom = MomentumState::zeros(1);
            let mut pre = PrecondState::new(PrecondKind::Identity, 0.0, 1).unwrap();
            let mut rng = RngStream::new(0, 0);
            if w {
                step_proxgen_w(&theta, &Quadratic1D, cfg, &mut mom, &mut pre, 1, &mut rng).unwrap()
            } else {
                step_proxgen(&theta, &Quadratic1D, cfg, &mut mom, &mut pre, 1, &mut rng).unwrap()
            }
        };
        assert_eq!(run_one(&cfg, true).theta_next[0], run_one(&cfg, false).theta_next[0]);

        // lambda = 0, zeta > 0: decoupled-weight-decay SGD
        cfg.weight_decay = 0.2;
        cfg.regularizer.lambda = LambdaSchedule::constant(0.0).unwrap();
        let out = run_one(&cfg, true);
        let expected = (1.0 - 0.1 * 0.2) * 2.0 - 0.1 * 2.0;
        assert_abs_diff_eq!(out.theta_next[0], expected, epsilon = 1e-15);
    }

    #[test]
    fn prox_sgd_alpha_one_is_exact_prox_point() {
        let mut cfg = base_cfg(Method::ProxSgd, 1.0);
        cfg.step = StepSchedule::constant(1.0).unwrap();
        let mut mom = MomentumState::zeros(1);
        let mut pre = PrecondState::new(PrecondKind::Identity, 0.0, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        let theta = ParamVector::new(alloc::vec![2.0]).unwrap();
        let out = step_prox_sgd(&theta, &Quadratic1D, &cfg, &mut mom, &mut pre, 1, &mut rng).unwrap();
        // theta_hat = soft(2 - 2, 1) = 0, and alpha = 1 lands exactly there
        assert_eq!(out.theta_next[0], 0.0);
    }

    #[test]
    fn prox_sgd_convex_combination_keeps_coordinates_nonzero() {
        let cfg = base_cfg(Method::ProxSgd, 10.0); // huge penalty: theta_hat = 0
        let mut mom = MomentumState::zeros(1);
        let mut pre = PrecondState::new(PrecondKind::Identity, 0.0, 1).unwrap();
        let mut rng = RngStream::new(0, 0);
        let theta = ParamVector::new(alloc::vec![2.0]).unwrap();
        let out = step_prox_sgd(&theta, &Quadratic1D, &cfg, &mut mom, &mut pre, 1, &mut rng).unwrap();
        assert!(out.theta_next[0] != 0.0);
        assert_abs_diff_eq!(out.theta_next[0], 0.9 * 2.0, epsilon = 1e-15);
    }

    #[test]
    fn subgradient_sign_conventions() {
        assert_eq!(penalty_subgradient(Family::SparseLq, Exponent::One, 1.0), 1.0);
        assert_eq!(penalty_subgradient(Family::SparseLq, Exponent::One, -2.0), -1.0);
        assert_eq!(penalty_subgradient(Family::SparseLq, Exponent::One, 0.0), 0.0);
        // q/|x|^(1-q) blows up for tiny nonzero x
        let d = penalty_subgradient(Family::SparseLq, Exponent::Half, 0.01);
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-12);
        assert_eq!(penalty_subgradient(Family::SparseLq, Exponent::Half, 0.0), 0.0);
    }

    #[test]
    fn subgradient_rejects_l0() {
        let mut cfg = base_cfg(Method::Subgradient, 1.0);
        cfg.regularizer.q = Exponent::Zero;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_validation_rules() {
        // weight decay is exclusive to the decoupled-decay stepper
        let mut cfg = base_cfg(Method::ProxGen, 0.1);
        cfg.weight_decay = 0.1;
        assert!(cfg.validate().is_err());

        // hard quantization needs a quant-lq regularizer
        let mut cfg = base_cfg(Method::ProxGen, 0.1);
        cfg.hard_quantize_at = Some(5);
        assert!(cfg.validate().is_err());
        cfg.regularizer.family = Family::QuantLq;
        assert!(cfg.validate().is_ok());

        // the Euclidean-prox baseline is quantization-only
        let cfg = base_cfg(Method::ProxQuantOriginal, 0.1);
        assert!(cfg.validate().is_err());

        // adaptive metrics need strictly positive damping
        let mut cfg = base_cfg(Method::ProxGen, 0.1);
        cfg.precond = PrecondKind::AdaGrad;
        cfg.delta = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hard_quantize_conventions() {
        let v = ParamVector::new(alloc::vec![0.3, -0.7]).unwrap();
        assert_eq!(hard_quantize(&v).as_slice(), &[1.0, -1.0]);
        let z = ParamVector::zeros(1);
        assert_eq!(hard_quantize(&z).as_slice(), &[1.0]);
        let pm = ParamVector::new(alloc::vec![1.0, -1.0]).unwrap();
        assert_eq!(hard_quantize(&pm).as_slice(), pm.as_slice());
    }

    fn lasso_fixture() -> LassoInstance {
        generate_lasso(20, 12, 3, 0.05, &mut RngStream::new(42, 0)).unwrap()
    }

    #[test]
    fn run_zero_iters_returns_theta0() {
        let inst = lasso_fixture();
        let mut cfg = base_cfg(Method::ProxGen, 0.1);
        cfg.max_iters = 0;
        cfg.batch_size = 4;
        let theta0 = ParamVector::zeros(20);
        let res = run(
            &inst,
            &cfg,
            theta0.clone(),
            &mut RngStream::new(0, 1),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(res.theta, theta0);
        assert!(res.records.is_empty());
        assert_eq!(res.status, RunStatus::Completed);
    }

    #[test]
    fn run_is_deterministic_under_seed() {
        let inst = lasso_fixture();
        let mut cfg = base_cfg(Method::ProxGen, 0.05);
        cfg.batch_size = 4;
        cfg.max_iters = 200;
        cfg.precond = PrecondKind::AdamEma { beta: 0.999 };
        cfg.delta = 1e-8;
        cfg.momentum = MomentumSchedule::constant(0.9).unwrap();
        let opts = RunOptions {
            diagnostics_every: 50,
            true_support: Some(inst.support()),
        };
        let a = run(&inst, &cfg, ParamVector::zeros(20), &mut RngStream::new(5, 2), &opts).unwrap();
        let b = run(&inst, &cfg, ParamVector::zeros(20), &mut RngStream::new(5, 2), &opts).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.objective.to_bits(), y.objective.to_bits());
            assert_eq!(x.stationarity_bound.to_bits(), y.stationarity_bound.to_bits());
        }
    }

    #[test]
    fn exact_zeros_appear_under_proxgen_but_not_subgradient() {
        let inst = lasso_fixture();
        let mut cfg = base_cfg(Method::ProxGen, 0.5);
        cfg.batch_size = 12;
        cfg.max_iters = 500;
        cfg.step = StepSchedule::constant(0.01).unwrap();
        let opts = RunOptions::default();
        let mut rng = RngStream::new(9, 3);
        let init: Vec<f64> = rng.normal_vec(20, 0.5);
        let res = run(
            &inst,
            &cfg,
            ParamVector::new(init.clone()).unwrap(),
            &mut RngStream::new(7, 0),
            &opts,
        )
        .unwrap();
        assert!(res.theta.sparsity() > 0.0, "no exact zeros produced");

        cfg.method = Method::Subgradient;
        let res2 = run(
            &inst,
            &cfg,
            ParamVector::new(init).unwrap(),
            &mut RngStream::new(7, 0),
            &opts,
        )
        .unwrap();
        assert_eq!(res2.theta.sparsity(), 0.0);
    }

    #[test]
    fn monotone_descent_on_deterministic_convex_problem() {
        // full batch, rho = 0, identity metric, alpha within the smoothness
        // regime: the proximal objective must be non-increasing.
        let inst = lasso_fixture();
        let lipschitz = inst.lipschitz_estimate(100);
        let mut cfg = base_cfg(Method::ProxGen, 0.1);
        cfg.step = StepSchedule::constant((1.0 + cfg.delta) / (3.0 * lipschitz)).unwrap();
        cfg.batch_size = 12;
        cfg.max_iters = 300;
        let opts = RunOptions {
            diagnostics_every: 1,
            true_support: None,
        };
        let res = run(
            &inst,
            &cfg,
            ParamVector::zeros(20),
            &mut RngStream::new(1, 1),
            &opts,
        )
        .unwrap();
        for w in res.records.windows(2) {
            assert!(
                w[1].objective <= w[0].objective + 1e-10,
                "objective increased: {} -> {}",
                w[0].objective,
                w[1].objective
            );
        }
    }
}
