//! Sparse training of a small MLP on Gaussian blobs, comparing the
//! decoupled-weight-decay proximal stepper against the subgradient
//! baseline across exponents and strengths. lambda = 0 rows are the dense
//! baselines the sparsity/accuracy trade-off is judged against.

use proxgen_core::optim::{run as run_optimizer, RunOptions};
use proxgen_core::problems::{generate_blobs, MlpProblem, MlpSpec};
use proxgen_core::prox::Family;
use proxgen_core::rng::RngStream;

use super::{
    enumerate_cells, finalize, initial_theta, records_path, status_token, stepper_config, streams,
    Cell, ExperimentOutcome,
};
use crate::config::ExperimentConfig;
use crate::csvio::{self, fmt_f64};
use crate::dataset_io;
use crate::pool::parallel_map;
use crate::CliError;

const HEADER: &str = "experiment,method,family,q,lambda,seed,init,status,final_objective,sparsity,train_accuracy,test_accuracy,records_file";

pub(crate) fn mlp_spec(cfg: &ExperimentConfig) -> MlpSpec {
    MlpSpec {
        input_dim: cfg.input_dim,
        hidden_dim: cfg.hidden_dim,
        output_dim: cfg.classes,
        activation: cfg.activation,
        loss: cfg.loss,
    }
}

/// Train and test come from one generated pool (shared class geometry),
/// split deterministically: first `train_n` samples train, the rest test.
pub(crate) fn problems_for_seed(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(MlpProblem, proxgen_core::problems::Dataset), CliError> {
    let pool = generate_blobs(
        cfg.train_n + cfg.test_n,
        cfg.input_dim,
        cfg.classes,
        cfg.separation,
        &mut RngStream::new(seed, streams::DATA),
    )?;
    let (train, test) = pool.split_at(cfg.train_n);
    Ok((MlpProblem::new(mlp_spec(cfg), train)?, test))
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    if cfg.export_datasets {
        for &seed in &cfg.seeds {
            let (problem, test) = problems_for_seed(cfg, seed)?;
            dataset_io::export_classification(
                &cfg.output_dir.join(format!("dataset_train_seed{seed}.csv")),
                &problem.data,
            )?;
            dataset_io::export_classification(
                &cfg.output_dir.join(format!("dataset_test_seed{seed}.csv")),
                &test,
            )?;
        }
    }

    let cells = enumerate_cells(cfg, Family::SparseLq);
    let total = cells.len();
    let rows = parallel_map(cfg.jobs, cells, |cell| run_cell(cfg, cell));
    let failed = rows
        .iter()
        .filter(|r| !matches!(r, Ok((_, true))))
        .count();
    let rows = rows
        .into_iter()
        .zip(enumerate_cells(cfg, Family::SparseLq))
        .map(|(r, cell)| match r {
            Ok((row, _)) => row,
            Err(e) => format!(
                "{},failed:{},,,,,{}",
                cell.row_prefix(cfg.experiment, Family::SparseLq),
                e.to_string().replace(',', ";"),
                cell.records_file()
            ),
        })
        .collect();
    finalize(cfg, HEADER, rows, failed, total)
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<(String, bool), CliError> {
    let (problem, test) = problems_for_seed(cfg, cell.seed)?;
    let stepper = stepper_config(cfg, cell, Family::SparseLq)?;
    let theta0 = initial_theta(cell.init, problem.spec.param_count(), cell.seed);
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

    let train_accuracy = problem.accuracy(&result.theta, &problem.data);
    let test_accuracy = problem.accuracy(&result.theta, &test);
    let completed = result.status == proxgen_core::optim::RunStatus::Completed;
    let row = format!(
        "{},{},{},{},{},{},{}",
        cell.row_prefix(cfg.experiment, Family::SparseLq),
        status_token(&result.status),
        result
            .records
            .last()
            .map(|r| fmt_f64(r.objective))
            .unwrap_or_default(),
        fmt_f64(result.theta.sparsity()),
        fmt_f64(train_accuracy),
        fmt_f64(test_accuracy),
        cell.records_file()
    );
    Ok((row, completed))
}
