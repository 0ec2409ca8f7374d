//! Binary-quantization training: pre-train a dense MLP, then compare the
//! Euclidean-prox baseline against the metric-aware prox on the
//! quantization penalty, annealing lambda per epoch and hard-quantizing at
//! the configured iteration. Reported accuracies: the final float iterate
//! ("pre") and its sign snap ("post").

use std::collections::BTreeMap;

use proxgen_core::optim::{
    hard_quantize, run as run_optimizer, Method, RunOptions, StepperConfig,
};
use proxgen_core::prox::{Exponent, Family, RegularizerSpec};
use proxgen_core::rng::RngStream;
use proxgen_core::schedule::LambdaSchedule;
use proxgen_core::ParamVector;

use super::{
    enumerate_cells, finalize, initial_theta, records_path, status_token, stepper_config, streams,
    Cell, ExperimentOutcome,
};
use crate::config::ExperimentConfig;
use crate::csvio::{self, fmt_f64};
use crate::experiments::sparse_mlp::problems_for_seed;
use crate::pool::parallel_map;
use crate::CliError;

const HEADER: &str = "experiment,method,family,q,lambda,seed,init,status,final_objective,pre_quant_accuracy,post_quant_accuracy,records_file";

/// Dense pre-training (lambda = 0) shared by every cell of a seed/init pair.
fn pretrain(cfg: &ExperimentConfig, seed: u64, init: crate::config::Init) -> Result<ParamVector, CliError> {
    let (problem, _) = problems_for_seed(cfg, seed)?;
    let stepper = StepperConfig {
        method: Method::ProxGen,
        step: cfg.step_schedule()?,
        momentum: cfg.momentum_schedule()?,
        regularizer: RegularizerSpec::new(
            Family::SparseLq,
            Exponent::One,
            LambdaSchedule::constant(0.0)?,
        ),
        precond: cfg.precond,
        delta: cfg.delta,
        weight_decay: 0.0,
        batch_size: cfg.batch_size,
        max_iters: cfg.pretrain_iters,
        hard_quantize_at: None,
    };
    let theta0 = initial_theta(init, problem.spec.param_count(), seed);
    let result = run_optimizer(
        &problem,
        &stepper,
        theta0,
        &mut RngStream::new(seed, streams::PRETRAIN_BATCH),
        &RunOptions {
            diagnostics_every: cfg.pretrain_iters.max(1),
            true_support: None,
        },
    )?;
    Ok(result.theta)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    // Pre-trained weights per (seed, init), computed once up front.
    let mut pretrained: BTreeMap<(u64, String), ParamVector> = BTreeMap::new();
    for &seed in &cfg.seeds {
        for &init in &cfg.inits {
            pretrained.insert((seed, init.token()), pretrain(cfg, seed, init)?);
        }
    }

    let cells = enumerate_cells(cfg, Family::QuantLq);
    let total = cells.len();
    let rows = parallel_map(cfg.jobs, cells, |cell| {
        let theta0 = pretrained[&(cell.seed, cell.init.token())].clone();
        run_cell(cfg, cell, theta0)
    });
    let failed = rows
        .iter()
        .filter(|r| !matches!(r, Ok((_, true))))
        .count();
    let rows = rows
        .into_iter()
        .zip(enumerate_cells(cfg, Family::QuantLq))
        .map(|(r, cell)| match r {
            Ok((row, _)) => row,
            Err(e) => format!(
                "{},failed:{},,,,{}",
                cell.row_prefix(cfg.experiment, Family::QuantLq),
                e.to_string().replace(',', ";"),
                cell.records_file()
            ),
        })
        .collect();
    finalize(cfg, HEADER, rows, failed, total)
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    theta0: ParamVector,
) -> Result<(String, bool), CliError> {
    let (problem, test) = problems_for_seed(cfg, cell.seed)?;
    let stepper = stepper_config(cfg, cell, Family::QuantLq)?;
    let opts = RunOptions {
        diagnostics_every: cfg.diagnostics_every,
        true_support: None,
    };
    let result = run_optimizer(
        &problem,
        &stepper,
        theta0,
        &mut RngStream::new(cell.seed, streams::BATCH),
        &opts,
    )?;
    csvio::write_records(&records_path(&cfg.output_dir, cell), &result.records)?;

    let pre_quant_accuracy = problem.accuracy(&result.theta, &test);
    let post_quant_accuracy = problem.accuracy(&hard_quantize(&result.theta), &test);
    let completed = result.status == proxgen_core::optim::RunStatus::Completed;
    let row = format!(
        "{},{},{},{},{},{}",
        cell.row_prefix(cfg.experiment, Family::QuantLq),
        status_token(&result.status),
        result
            .records
            .last()
            .map(|r| fmt_f64(r.objective))
            .unwrap_or_default(),
        fmt_f64(pre_quant_accuracy),
        fmt_f64(post_quant_accuracy),
        cell.records_file()
    );
    Ok((row, completed))
}
