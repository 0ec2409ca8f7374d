//! The experiment drivers. Each experiment enumerates a grid of cells
//! (method, q, lambda, seed, init), runs every cell in parallel with
//! deterministic per-cell RNG streams, writes one records CSV per run plus
//! a summary CSV, and never lets one failing cell kill the sweep.

use std::fs;
use std::path::{Path, PathBuf};

use proxgen_core::optim::{Method, RunStatus, StepperConfig};
use proxgen_core::prox::{Exponent, Family, RegularizerSpec};
use proxgen_core::rng::RngStream;
use proxgen_core::ParamVector;

use crate::config::{Experiment, ExperimentConfig, Init};
use crate::csvio;
use crate::CliError;

mod lasso;
mod prox_fuzz;
mod quant_mlp;
mod sparse_mlp;

pub use prox_fuzz::{fuzz_operator, FuzzReport};

/// Fixed stream ids so every consumer of randomness is independent and
/// reproducible per seed.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const TEST_DATA: u64 = 1;
    pub const INIT: u64 = 2;
    pub const BATCH: u64 = 3;
    pub const PRETRAIN_BATCH: u64 = 4;
    pub const FUZZ: u64 = 5;
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub summary_path: PathBuf,
    pub header: String,
    pub rows: Vec<String>,
    pub failed_cells: usize,
    pub total_cells: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    write_config_echo(cfg)?;
    match cfg.experiment {
        Experiment::LassoRecovery => lasso::run(cfg),
        Experiment::SparseMlp => sparse_mlp::run(cfg),
        Experiment::QuantMlp => quant_mlp::run(cfg),
        Experiment::ProxFuzz => prox_fuzz::run(cfg),
    }
}

fn write_config_echo(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let path = cfg.output_dir.join("config_echo.json");
    let text = serde_json::to_string_pretty(&cfg.echo())
        .map_err(|e| CliError::config(format!("cannot serialize config echo: {e}")))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// One grid cell; the unit of parallel execution.
#[derive(Debug, Clone)]
pub struct Cell {
    pub method: Method,
    pub q: Exponent,
    pub lambda: f64,
    pub seed: u64,
    pub init: Init,
}

impl Cell {
    pub fn run_id(&self) -> String {
        format!(
            "{}_q{}_lam{}_seed{}_{}",
            self.method.token(),
            self.q.token().replace('/', "-"),
            self.lambda.to_string().replace('.', "p"),
            self.seed,
            self.init.file_tag()
        )
    }

    pub fn records_file(&self) -> String {
        format!("records_{}.csv", self.run_id())
    }

    /// Shared summary prefix: experiment,method,family,q,lambda,seed,init.
    pub fn row_prefix(&self, experiment: Experiment, family: Family) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            experiment.token(),
            self.method.token(),
            family.token(),
            self.q.token(),
            csvio::fmt_f64(self.lambda),
            self.seed,
            self.init.token()
        )
    }
}

/// Grid enumeration shared by the training experiments. Skips the
/// combinations that make no sense: the two-stage baseline only handles the
/// convex penalty (q = 1), the subgradient baseline cannot handle q = 0,
/// and the Euclidean-prox baseline only applies to quantization.
pub fn enumerate_cells(cfg: &ExperimentConfig, family: Family) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &seed in &cfg.seeds {
        for &init in &cfg.inits {
            for &q in &cfg.qs {
                for &method in &cfg.methods {
                    if method == Method::ProxSgd && q != Exponent::One {
                        continue;
                    }
                    if method == Method::Subgradient && q == Exponent::Zero {
                        continue;
                    }
                    if method == Method::ProxQuantOriginal && family != Family::QuantLq {
                        continue;
                    }
                    for &lambda in &cfg.lambda_grid {
                        cells.push(Cell {
                            method,
                            q,
                            lambda,
                            seed,
                            init,
                        });
                    }
                }
            }
        }
    }
    cells
}

pub fn initial_theta(init: Init, dim: usize, seed: u64) -> ParamVector {
    match init {
        Init::Zero => ParamVector::zeros(dim),
        Init::Gaussian(scale) => {
            let mut rng = RngStream::new(seed, streams::INIT);
            ParamVector::new(rng.normal_vec(dim, scale)).expect("finite gaussian init")
        }
    }
}

/// Stepper configuration for one cell.
pub fn stepper_config(
    cfg: &ExperimentConfig,
    cell: &Cell,
    family: Family,
) -> Result<StepperConfig, CliError> {
    let weight_decay = if cell.method == Method::ProxGenW {
        cfg.zeta
    } else {
        0.0
    };
    let hard_quantize_at = if family == Family::QuantLq {
        cfg.hard_quantize_at
    } else {
        None
    };
    Ok(StepperConfig {
        method: cell.method,
        step: cfg.step_schedule()?,
        momentum: cfg.momentum_schedule()?,
        regularizer: RegularizerSpec::new(family, cell.q, cfg.lambda_schedule(cell.lambda)?),
        precond: cfg.precond,
        delta: cfg.delta,
        weight_decay,
        batch_size: cfg.batch_size,
        max_iters: cfg.max_iters,
        hard_quantize_at,
    })
}

pub fn status_token(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::Diverged { at, reason } => format!("diverged@{at}:{}", reason.replace(',', ";")),
    }
}

pub fn finalize(
    cfg: &ExperimentConfig,
    header: &str,
    rows: Vec<String>,
    failed_cells: usize,
    total_cells: usize,
) -> Result<ExperimentOutcome, CliError> {
    let summary_path = cfg.output_dir.join("summary.csv");
    csvio::write_summary(&summary_path, header, &rows)?;
    Ok(ExperimentOutcome {
        out_dir: cfg.output_dir.clone(),
        summary_path,
        header: header.to_string(),
        rows,
        failed_cells,
        total_cells,
    })
}

pub fn records_path(out_dir: &Path, cell: &Cell) -> PathBuf {
    out_dir.join(cell.records_file())
}
