//! Stochastic proximal gradient methods with arbitrary positive diagonal
//! preconditioners and closed-form proximal mappings for (possibly
//! non-convex) `lq` regularizers.
//!
//! The crate is organised around a small set of building blocks:
//!
//! - [`schedule`]: stepsize, momentum and regularization-strength schedules,
//!   all pure functions of the iteration index.
//! - [`rng`]: a seedable, streamable RNG with reproducible draws.
//! - [`prox`]: scalar and vector proximal operators for sparse `lq`
//!   (q in {0, 1/2, 2/3, 1}) and binary-quantization penalties, plus a
//!   brute-force 1-D oracle used as ground truth in tests and fuzzing.
//! - [`precond`]: first-order momentum and diagonal preconditioner state
//!   (identity / AdaGrad / EMA-of-squared-gradients).
//! - [`optim`]: the steppers (preconditioned proximal step, its
//!   decoupled-weight-decay variant, the two-stage interpolated baseline,
//!   a subgradient baseline and the Euclidean-metric quantization baseline)
//!   and the run loop.
//! - [`problems`]: desk-scale problems (sparse linear regression with a
//!   known support, a one-hidden-layer MLP with hand-written backprop,
//!   Gaussian blob data).
//! - [`diagnostics`]: computable convergence witnesses (stationarity bound,
//!   condition monitors, support-recovery metrics, rate trends).
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (on by default) is only forwarded to dependencies.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod diagnostics;
mod error;
pub(crate) mod math;
pub mod optim;
pub mod precond;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod schedule;
mod vector;

pub use error::CoreError;
pub use vector::ParamVector;
