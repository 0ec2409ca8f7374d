//! Stepsize, momentum and regularization-strength schedules.
//!
//! Schedules are validated at construction and evaluated as pure functions
//! of the 1-based iteration index, which keeps optimizer runs replayable.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;

/// Stepsize sequence `alpha_t`; non-increasing and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    Constant { alpha0: f64 },
    /// `alpha_t = alpha0 * factor^(number of milestones <= t)`.
    StepDecay {
        alpha0: f64,
        factor: f64,
        milestones: Vec<u64>,
    },
}

impl StepSchedule {
    pub fn constant(alpha0: f64) -> Result<Self, CoreError> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(CoreError::config("stepsize alpha0 must be finite and > 0"));
        }
        Ok(StepSchedule::Constant { alpha0 })
    }

    pub fn step_decay(alpha0: f64, factor: f64, milestones: Vec<u64>) -> Result<Self, CoreError> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(CoreError::config("stepsize alpha0 must be finite and > 0"));
        }
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(CoreError::config("decay factor must lie in (0, 1]"));
        }
        if milestones.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::config("milestones must be strictly increasing"));
        }
        Ok(StepSchedule::StepDecay {
            alpha0,
            factor,
            milestones,
        })
    }

    /// `alpha_t` for the 1-based iteration index `t`.
    pub fn value(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            StepSchedule::Constant { alpha0 } => *alpha0,
            StepSchedule::StepDecay {
                alpha0,
                factor,
                milestones,
            } => {
                let decays = milestones.partition_point(|m| *m <= t);
                alpha0 * math::pow(*factor, decays as f64)
            }
        }
    }
}

/// Momentum sequence `rho_t` in [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumSchedule {
    Constant { rho0: f64 },
    /// `rho_t = rho0 * mu^(t - 1)`.
    Exponential { rho0: f64, mu: f64 },
}

impl MomentumSchedule {
    pub fn constant(rho0: f64) -> Result<Self, CoreError> {
        check_unit_interval(rho0, "rho0")?;
        Ok(MomentumSchedule::Constant { rho0 })
    }

    pub fn exponential(rho0: f64, mu: f64) -> Result<Self, CoreError> {
        check_unit_interval(rho0, "rho0")?;
        check_unit_interval(mu, "mu")?;
        Ok(MomentumSchedule::Exponential { rho0, mu })
    }

    pub fn value(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            MomentumSchedule::Constant { rho0 } => *rho0,
            MomentumSchedule::Exponential { rho0, mu } => rho0 * math::pow(*mu, (t - 1) as f64),
        }
    }
}

fn check_unit_interval(v: f64, name: &str) -> Result<(), CoreError> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(CoreError::config(alloc::format!(
            "{name} must lie in [0, 1)"
        )))
    }
}

/// Regularization strength `lambda_t`; constant or annealed per epoch.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSchedule {
    Constant { base: f64 },
    /// `lambda_t = base * epoch(t)` with `epoch(t) = ceil(t / epoch_length)`,
    /// so the base value itself is used throughout epoch 1.
    Homotopy { base: f64, epoch_length: u64 },
}

impl LambdaSchedule {
    pub fn constant(base: f64) -> Result<Self, CoreError> {
        if !(base >= 0.0 && base.is_finite()) {
            return Err(CoreError::config("lambda must be finite and >= 0"));
        }
        Ok(LambdaSchedule::Constant { base })
    }

    pub fn homotopy(base: f64, epoch_length: u64) -> Result<Self, CoreError> {
        if !(base >= 0.0 && base.is_finite()) {
            return Err(CoreError::config("lambda must be finite and >= 0"));
        }
        if epoch_length == 0 {
            return Err(CoreError::config("epoch_length must be >= 1"));
        }
        Ok(LambdaSchedule::Homotopy { base, epoch_length })
    }

    pub fn value(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            LambdaSchedule::Constant { base } => *base,
            LambdaSchedule::Homotopy { base, epoch_length } => {
                let epoch = t.div_ceil(*epoch_length);
                base * epoch as f64
            }
        }
    }

    /// The schedule's base strength (`lambda_1` for homotopy).
    pub fn base(&self) -> f64 {
        match self {
            LambdaSchedule::Constant { base } => *base,
            LambdaSchedule::Homotopy { base, .. } => *base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stepsize_examples() {
        let c = StepSchedule::constant(0.001).unwrap();
        assert_eq!(c.value(57), 0.001);

        let d = StepSchedule::step_decay(0.01, 0.1, vec![150]).unwrap();
        assert_eq!(d.value(149), 0.01);
        assert!((d.value(151) - 0.001).abs() < 1e-18);
    }

    #[test]
    fn momentum_examples() {
        let c = MomentumSchedule::constant(0.9).unwrap();
        assert_eq!(c.value(1000), 0.9);

        let e = MomentumSchedule::exponential(0.9, 0.99).unwrap();
        assert_eq!(e.value(1), 0.9);

        let e2 = MomentumSchedule::exponential(0.9, 0.5).unwrap();
        assert!((e2.value(3) - 0.225).abs() < 1e-15);
    }

    #[test]
    fn lambda_examples() {
        let h = LambdaSchedule::homotopy(1e-8, 100).unwrap();
        assert!((h.value(250) - 3e-8).abs() < 1e-22);

        let c = LambdaSchedule::constant(0.01).unwrap();
        assert_eq!(c.value(1), 0.01);

        let h2 = LambdaSchedule::homotopy(2.0, 10).unwrap();
        assert_eq!(h2.value(10), 2.0);
        assert_eq!(h2.value(11), 4.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(StepSchedule::constant(0.0).is_err());
        assert!(StepSchedule::step_decay(0.1, 1.5, vec![]).is_err());
        assert!(StepSchedule::step_decay(0.1, 0.5, vec![10, 10]).is_err());
        assert!(MomentumSchedule::constant(1.0).is_err());
        assert!(LambdaSchedule::constant(-1.0).is_err());
        assert!(LambdaSchedule::homotopy(1.0, 0).is_err());
    }

    proptest! {
        // alpha_t is non-increasing and positive for every schedule kind.
        #[test]
        fn stepsize_non_increasing(
            alpha0 in 1e-6f64..10.0,
            factor in 0.05f64..1.0,
            m1 in 1u64..500,
            gap in 1u64..500,
            t1 in 1u64..2000,
            t2 in 0u64..2000,
        ) {
            let s = StepSchedule::step_decay(alpha0, factor, vec![m1, m1 + gap]).unwrap();
            let (a, b) = (t1, t1 + t2);
            prop_assert!(s.value(a) >= s.value(b));
            prop_assert!(s.value(b) > 0.0);
        }

        // exponential momentum stays in [0, 1) and strictly decreases
        // (ranges keep mu^t well away from f64 underflow).
        #[test]
        fn momentum_bounds(rho0 in 0.01f64..0.999, mu in 0.5f64..0.999, t in 1u64..500) {
            let s = MomentumSchedule::exponential(rho0, mu).unwrap();
            let v = s.value(t);
            prop_assert!((0.0..1.0).contains(&v));
            prop_assert!(s.value(t + 1) < v);
        }

        // homotopy lambda is non-negative and non-decreasing.
        #[test]
        fn lambda_monotone(base in 0.0f64..10.0, len in 1u64..100, t in 1u64..5000) {
            let s = LambdaSchedule::homotopy(base, len).unwrap();
            prop_assert!(s.value(t) >= 0.0);
            prop_assert!(s.value(t + 1) >= s.value(t));
        }
    }
}
