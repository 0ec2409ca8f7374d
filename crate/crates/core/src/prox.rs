//! Closed-form preconditioned proximal operators.
//!
//! Every scalar operator solves, for one coordinate,
//!
//! ```text
//! minimize_x  (kappa/2) (x - z)^2 + alpha * lambda * pen(x)
//! ```
//!
//! where `kappa > 0` is the coordinate's effective metric weight and `pen`
//! is either the sparse penalty `|x|^q` or the binary-quantization penalty
//! `|x - sign(x)|^q`, with `q` restricted to {0, 1/2, 2/3, 1} (the exponents
//! with closed forms). Dividing by `kappa/2` gives the equivalent scalar
//! program `(x - z)^2 + lambda_eff * pen(x)` with
//! `lambda_eff = 2 * alpha * lambda / kappa`; all formulas below are stated
//! in terms of `lambda_eff`.
//!
//! [`prox_oracle_1d`] is a brute-force grid + golden-section minimizer of
//! the same scalar program. It is deliberately independent of every closed
//! form and serves as ground truth for tests and for the fuzzing harness.

use alloc::vec::Vec;

use crate::error::{check_len, CoreError};
use crate::math;
use crate::schedule::LambdaSchedule;
use crate::ParamVector;

/// One coordinate of a preconditioned prox subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxInput {
    /// Pre-prox coordinate value (the gradient-step result).
    pub z: f64,
    /// Effective metric weight `kappa = C_i + delta > 0`.
    pub kappa: f64,
    /// Stepsize `alpha_t > 0`.
    pub alpha: f64,
    /// Regularization strength `lambda >= 0`.
    pub lambda: f64,
}

impl ProxInput {
    pub fn new(z: f64, kappa: f64, alpha: f64, lambda: f64) -> Result<Self, CoreError> {
        if !z.is_finite() {
            return Err(CoreError::config("prox input z must be finite"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(CoreError::config("prox weight kappa must be finite and > 0"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(CoreError::config("prox stepsize alpha must be finite and > 0"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(CoreError::config("prox strength lambda must be finite and >= 0"));
        }
        Ok(ProxInput {
            z,
            kappa,
            alpha,
            lambda,
        })
    }

    /// Effective strength of the normalized scalar program.
    pub fn lambda_eff(&self) -> f64 {
        2.0 * self.alpha * self.lambda / self.kappa
    }
}

/// Regularizer exponent; only the four values with closed-form mappings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Zero,
    Half,
    TwoThirds,
    One,
}

impl Exponent {
    pub const ALL: [Exponent; 4] = [
        Exponent::Zero,
        Exponent::Half,
        Exponent::TwoThirds,
        Exponent::One,
    ];

    pub fn value(self) -> f64 {
        match self {
            Exponent::Zero => 0.0,
            Exponent::Half => 0.5,
            Exponent::TwoThirds => 2.0 / 3.0,
            Exponent::One => 1.0,
        }
    }

    /// Short token used in file names and CSV columns ("0", "1/2", "2/3", "1").
    pub fn token(self) -> &'static str {
        match self {
            Exponent::Zero => "0",
            Exponent::Half => "1/2",
            Exponent::TwoThirds => "2/3",
            Exponent::One => "1",
        }
    }
}

/// Which penalty family a regularizer applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `lambda * sum_j |theta_j|^q` (sparsity-inducing).
    SparseLq,
    /// `lambda * sum_j |theta_j - sign(theta_j)|^q` (pulls weights to +-1).
    QuantLq,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::SparseLq => "sparse-lq",
            Family::QuantLq => "quant-lq",
        }
    }
}

/// A penalty family, an exponent and a strength schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerSpec {
    pub family: Family,
    pub q: Exponent,
    pub lambda: LambdaSchedule,
}

impl RegularizerSpec {
    pub fn new(family: Family, q: Exponent, lambda: LambdaSchedule) -> Self {
        RegularizerSpec { family, q, lambda }
    }

    pub fn lambda_at(&self, t: u64) -> f64 {
        self.lambda.value(t)
    }

    /// Unweighted penalty value `R(theta)` (without the `lambda` factor).
    pub fn penalty(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .map(|&x| match self.family {
                Family::SparseLq => sparse_penalty(x, self.q),
                Family::QuantLq => quant_penalty(x, self.q),
            })
            .sum()
    }
}

/// `|x|^q` with the counting convention `|0|^0 = 0`.
pub fn sparse_penalty(x: f64, q: Exponent) -> f64 {
    match q {
        Exponent::Zero => {
            if x == 0.0 {
                0.0
            } else {
                1.0
            }
        }
        Exponent::One => x.abs(),
        // sqrt/cbrt instead of a general pow: these sit on the oracle's
        // innermost loop.
        Exponent::Half => math::sqrt(x.abs()),
        Exponent::TwoThirds => math::cbrt(x * x),
    }
}

/// `|x - sign(x)|^q` with sign(0) = 0, so x = 0 is penalty-free.
pub fn quant_penalty(x: f64, q: Exponent) -> f64 {
    sparse_penalty(x - math::sign(x), q)
}

/// Soft-thresholding: `sign(z) * max(|z| - alpha*lambda/kappa, 0)`.
///
/// The positive-part clamp is required for the true minimizer; without it
/// the formula is wrong inside the dead zone `|z| < alpha*lambda/kappa`.
pub fn prox_l1(input: ProxInput) -> f64 {
    if input.lambda == 0.0 {
        return input.z;
    }
    let tau = input.alpha * input.lambda / input.kappa;
    let mag = input.z.abs() - tau;
    if mag > 0.0 {
        math::sign(input.z) * mag
    } else {
        0.0
    }
}

/// Hard-thresholding: keep `z` when `z^2 > lambda_eff`, else 0.
/// The tie `z^2 == lambda_eff` (both points are minimizers) returns 0.
pub fn prox_l0(input: ProxInput) -> f64 {
    if input.lambda == 0.0 {
        return input.z;
    }
    if input.z * input.z > input.lambda_eff() {
        input.z
    } else {
        0.0
    }
}

/// Half-thresholding for the `|x|^(1/2)` penalty.
///
/// For `|z|` above the dead-zone radius `p = (54^(1/3)/4) * lambda_eff^(2/3)`
/// the minimizer is
///
/// ```text
/// sign(z) * (2/3)|z| * (1 + cos(2*pi/3 - (2/3)*phi)),
/// phi = arccos( (lambda_eff/8) * (|z|/3)^(-3/2) )
/// ```
///
/// and exactly 0 otherwise. `|z| > p` implies the arccos argument is <= 1;
/// a violation beyond float rounding is a bug, not an input error.
pub fn prox_l_half(input: ProxInput) -> f64 {
    if input.lambda == 0.0 {
        return input.z;
    }
    let lam = input.lambda_eff();
    let abs_z = input.z.abs();
    let dead_zone = 0.25 * math::cbrt(54.0) * math::pow(lam, 2.0 / 3.0);
    if abs_z <= dead_zone {
        return 0.0;
    }
    let arg = (lam / 8.0) * math::pow(abs_z / 3.0, -1.5);
    assert!(
        arg <= 1.0 + 1e-9,
        "half-thresholding arccos argument {arg} > 1 outside the dead zone"
    );
    let phi = math::acos(arg.min(1.0));
    let x = (2.0 / 3.0) * abs_z * (1.0 + math::cos(2.0 * core::f64::consts::PI / 3.0 - 2.0 * phi / 3.0));
    math::sign(input.z) * x
}

/// Closed form for the `|x|^(2/3)` penalty.
///
/// For `|z|` above the dead-zone radius `(2/3) * (3*lambda_eff^3)^(1/4)`:
///
/// ```text
/// A   = (2/sqrt(3)) * lambda_eff^(1/4) * sqrt(cosh(phi/3)),
/// phi = arccosh( (27 z^2 / 16) * lambda_eff^(-3/2) ),
/// x   = sign(z) * ( (A + sqrt(2|z|/A - A^2)) / 2 )^3
/// ```
///
/// and exactly 0 otherwise. Above the dead zone the arccosh argument is
/// >= 1 and `2|z|/A >= A^2`; violations beyond rounding indicate a bug.
pub fn prox_l_two_thirds(input: ProxInput) -> f64 {
    if input.lambda == 0.0 {
        return input.z;
    }
    let lam = input.lambda_eff();
    let abs_z = input.z.abs();
    let dead_zone = (2.0 / 3.0) * math::pow(3.0 * lam * lam * lam, 0.25);
    if abs_z <= dead_zone {
        return 0.0;
    }
    let arg = (27.0 * input.z * input.z / 16.0) * math::pow(lam, -1.5);
    assert!(
        arg >= 1.0 - 1e-9,
        "arccosh argument {arg} < 1 outside the dead zone"
    );
    let phi = math::acosh(arg.max(1.0));
    let a = (2.0 / math::sqrt(3.0)) * math::pow(lam, 0.25) * math::sqrt(math::cosh(phi / 3.0));
    let inner = 2.0 * abs_z / a - a * a;
    assert!(
        inner >= -1e-9,
        "negative discriminant {inner} outside the dead zone"
    );
    let half = (a + math::sqrt(inner.max(0.0))) / 2.0;
    math::sign(input.z) * half * half * half
}

/// Scalar sparse-lq prox, dispatched on the exponent.
pub fn prox_sparse(input: ProxInput, q: Exponent) -> f64 {
    match q {
        Exponent::Zero => prox_l0(input),
        Exponent::Half => prox_l_half(input),
        Exponent::TwoThirds => prox_l_two_thirds(input),
        Exponent::One => prox_l1(input),
    }
}

/// Prox of the quantization penalty `|x - sign(x)|^q`.
///
/// The objective splits into a branch toward +1 (x >= 0), a branch toward
/// -1 (x <= 0) and the penalty-free point x = 0. Each branch minimizer is
/// the sparse prox shifted by the branch target, clamped at 0 when it lands
/// outside its half-line; the returned value is the candidate with the
/// smallest objective. Ties go to the candidate closest to `z`, then to the
/// +1 branch, which pins the behaviour at symmetric inputs such as z = 0.
pub fn prox_quant_lq(input: ProxInput, q: Exponent) -> f64 {
    if input.lambda == 0.0 {
        return input.z;
    }
    let lam = input.lambda_eff();
    let objective = |x: f64| (x - input.z) * (x - input.z) + lam * quant_penalty(x, q);

    let shifted = |target: f64| {
        let y = prox_sparse(
            ProxInput {
                z: input.z - target,
                ..input
            },
            q,
        );
        target + y
    };
    let plus = shifted(1.0).max(0.0);
    let minus = shifted(-1.0).min(0.0);

    let mut best = plus;
    let mut best_obj = objective(plus);
    for cand in [minus, 0.0] {
        let obj = objective(cand);
        if obj < best_obj
            || (obj == best_obj && (cand - input.z).abs() < (best - input.z).abs())
        {
            best = cand;
            best_obj = obj;
        }
    }
    best
}

/// Coordinate-wise prox with a diagonal metric.
///
/// A diagonal metric makes the vector program decomposable, so this is
/// exactly the matching scalar prox applied per coordinate with
/// `kappa_i = kappa_diag[i]` and `lambda = spec.lambda_at(t)`.
pub fn prox_vector(
    theta_hat: &ParamVector,
    kappa_diag: &[f64],
    alpha: f64,
    spec: &RegularizerSpec,
    t: u64,
) -> Result<ParamVector, CoreError> {
    check_len(theta_hat.len(), kappa_diag.len())?;
    let lambda = spec.lambda_at(t);
    let mut out = Vec::with_capacity(theta_hat.len());
    for (&z, &kappa) in theta_hat.iter().zip(kappa_diag) {
        debug_assert!(kappa > 0.0);
        let input = ProxInput {
            z,
            kappa,
            alpha,
            lambda,
        };
        let x = match spec.family {
            Family::SparseLq => prox_sparse(input, spec.q),
            Family::QuantLq => prox_quant_lq(input, spec.q),
        };
        out.push(x);
    }
    Ok(ParamVector::from_vec_unchecked(out))
}

/// Normalized scalar objective `(x - z)^2 + lambda_eff * pen(x)`, the
/// quantity both the oracle and the gap checks minimize/compare.
pub fn prox_objective_1d(x: f64, z: f64, lambda_eff: f64, penalty: impl Fn(f64) -> f64) -> f64 {
    (x - z) * (x - z) + lambda_eff * penalty(x)
}

/// Brute-force ground-truth minimizer of the normalized scalar program.
///
/// Evaluates a uniform grid of 200_001 points over `[-(|z|+2), |z|+2]`
/// together with the special points {0, z}, then refines the best grid
/// bracket by golden-section search down to width 1e-12. Independent of
/// every closed form above by construction.
pub fn prox_oracle_1d(z: f64, lambda_eff: f64, penalty: impl Fn(f64) -> f64) -> f64 {
    assert!(lambda_eff >= 0.0);
    if lambda_eff == 0.0 {
        return z;
    }
    let h = |x: f64| prox_objective_1d(x, z, lambda_eff, &penalty);

    const CELLS: usize = 200_000;
    let hi = z.abs() + 2.0;
    let lo = -hi;
    let step = (hi - lo) / CELLS as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..=CELLS {
        let v = h(lo + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }

    // Golden-section refinement of the bracket around the best grid point.
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = lo + step * (best_i + 1).min(CELLS) as f64;
    let inv_phi = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    while b - a > 1e-12 {
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    let refined = 0.5 * (a + b);

    // The exact candidates z and 0 recover bit-exact dead zones and the
    // identity case that grid/golden points can only approach; on objective
    // ties they are preferred over the refined point (and 0 over z, which
    // pins the hard-threshold tie case).
    let mut best_x = refined;
    let mut best = h(refined);
    for cand in [z, 0.0] {
        let v = h(cand);
        if v <= best {
            best = v;
            best_x = cand;
        }
    }
    best_x
}
