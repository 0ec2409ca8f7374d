//! Oracle-conformance fuzzing for the closed-form proximal operators.
//!
//! For every (family, q) operator this samples inputs with |z| and the
//! effective strength log-uniform over wide ranges (plus a random metric
//! weight and stepsize, so the kappa/alpha/lambda decomposition is
//! exercised, not just the normalized form), compares the closed form's
//! objective against the brute-force oracle, and separately drives each
//! sparse operator inside its dead zone where the output must be exactly
//! 0.0.

use proxgen_core::prox::{
    prox_objective_1d, prox_oracle_1d, prox_quant_lq, prox_sparse, quant_penalty, sparse_penalty,
    Exponent, Family, ProxInput,
};
use proxgen_core::rng::RngStream;

use super::{finalize, streams, ExperimentOutcome};
use crate::config::ExperimentConfig;
use crate::csvio::fmt_f64;
use crate::pool::parallel_map;
use crate::CliError;

const HEADER: &str = "experiment,method,family,q,lambda,seed,init,status,samples,max_gap,mean_gap,dead_zone_checked,dead_zone_violations";

/// Gap statistics of one operator against the oracle.
#[derive(Debug, Clone)]
pub struct FuzzReport {
    pub family: Family,
    pub q: Exponent,
    pub samples: usize,
    /// max over samples of objective(closed form) - objective(oracle)
    pub max_gap: f64,
    pub mean_gap: f64,
    pub dead_zone_checked: usize,
    /// inputs strictly inside the dead zone whose output was not bit-exact 0
    pub dead_zone_violations: usize,
}

fn log_uniform(rng: &mut RngStream, lo_exp: f64, hi_exp: f64) -> f64 {
    let e = lo_exp + (hi_exp - lo_exp) * rng.unit_f64();
    10f64.powf(e)
}

/// Dead-zone radius of the sparse prox in terms of the normalized strength.
fn sparse_dead_zone(q: Exponent, lambda_eff: f64) -> f64 {
    match q {
        Exponent::One => lambda_eff / 2.0,
        Exponent::Zero => lambda_eff.sqrt(),
        Exponent::Half => 0.25 * 54f64.cbrt() * lambda_eff.powf(2.0 / 3.0),
        Exponent::TwoThirds => (2.0 / 3.0) * (3.0 * lambda_eff.powi(3)).powf(0.25),
    }
}

fn operator_stream(family: Family, q: Exponent) -> u64 {
    let qi = match q {
        Exponent::Zero => 0,
        Exponent::Half => 1,
        Exponent::TwoThirds => 2,
        Exponent::One => 3,
    };
    streams::FUZZ + 4 * family as u64 + qi
}

/// Fuzzes one operator with `samples` random inputs. Deterministic per
/// (seed, family, q).
pub fn fuzz_operator(family: Family, q: Exponent, samples: usize, seed: u64) -> FuzzReport {
    let mut rng = RngStream::new(seed, operator_stream(family, q));
    let mut max_gap = f64::NEG_INFINITY;
    let mut gap_sum = 0.0;
    let mut dead_zone_checked = 0usize;
    let mut dead_zone_violations = 0usize;

    for _ in 0..samples {
        // z in [-10, 10] with log-uniform magnitude; lambda_eff log-uniform
        let z = rng.pm_one() * log_uniform(&mut rng, -6.0, 1.0);
        let lambda_eff = log_uniform(&mut rng, -6.0, 1.0);
        // decompose into (kappa, alpha, lambda)
        let kappa = log_uniform(&mut rng, -2.0, 2.0);
        let alpha = log_uniform(&mut rng, -3.0, 0.0);
        let lambda = lambda_eff * kappa / (2.0 * alpha);
        let input = ProxInput {
            z,
            kappa,
            alpha,
            lambda,
        };
        // the exact strength the operator sees, after the decomposition
        let lam = input.lambda_eff();

        let (x, gap) = match family {
            Family::SparseLq => {
                let x = prox_sparse(input, q);
                let pen = |v: f64| sparse_penalty(v, q);
                let oracle = prox_oracle_1d(z, lam, pen);
                (
                    x,
                    prox_objective_1d(x, z, lam, pen) - prox_objective_1d(oracle, z, lam, pen),
                )
            }
            Family::QuantLq => {
                let x = prox_quant_lq(input, q);
                let pen = |v: f64| quant_penalty(v, q);
                let oracle = prox_oracle_1d(z, lam, pen);
                (
                    x,
                    prox_objective_1d(x, z, lam, pen) - prox_objective_1d(oracle, z, lam, pen),
                )
            }
        };
        debug_assert!(x.is_finite());
        max_gap = max_gap.max(gap);
        gap_sum += gap;

        if family == Family::SparseLq {
            // drive the operator strictly inside its dead zone
            let radius = sparse_dead_zone(q, lam);
            if radius > 0.0 && radius.is_finite() {
                let z_in = rng.pm_one() * (0.05 + 0.9 * rng.unit_f64()) * radius;
                let inside = ProxInput { z: z_in, ..input };
                dead_zone_checked += 1;
                if prox_sparse(inside, q) != 0.0 {
                    dead_zone_violations += 1;
                }
            }
        }
    }

    FuzzReport {
        family,
        q,
        samples,
        max_gap,
        mean_gap: gap_sum / samples as f64,
        dead_zone_checked,
        dead_zone_violations,
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    let seed = cfg.seeds[0];
    let mut operators = Vec::new();
    for family in [Family::SparseLq, Family::QuantLq] {
        for &q in &cfg.qs {
            operators.push((family, q));
        }
    }
    let total = operators.len();
    let reports = parallel_map(cfg.jobs, operators, |&(family, q)| {
        fuzz_operator(family, q, cfg.fuzz_samples, seed)
    });
    let rows = reports
        .iter()
        .map(|r| {
            format!
                ("{},closed-form,{},{},,{},,{},{},{},{},{},{}",
                cfg.experiment.token(),
                r.family.token(),
                r.q.token(),
                seed,
                "completed",
                r.samples,
                fmt_f64(r.max_gap),
                fmt_f64(r.mean_gap),
                r.dead_zone_checked,
                r.dead_zone_violations,
            )
        })
        .collect();
    finalize(cfg, HEADER, rows, 0, total)
}
