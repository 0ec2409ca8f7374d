//! Flat key-value experiment configuration.
//!
//! The config file format is one `key = value` pair per line; blank lines
//! and lines starting with `#` are skipped. Lists are comma-separated.
//! Unknown keys are errors. Every key has an experiment-specific default,
//! so an empty (or absent) file runs the stock experiment.
//!
//! Keys: `experiment`, `methods`, `qs`, `lambda_grid`, `lambda_schedule`
//! (`constant` | `homotopy`), `epoch_length`, `seeds`, `inits` (`zero` |
//! `gaussian:SCALE`), `alpha0`, `decay_factor`, `milestones`, `momentum`
//! (`constant` | `exponential`), `rho0`, `mu`, `precond` (`identity` |
//! `adagrad` | `adam-ema`), `beta`, `delta`, `zeta`, `batch_size`,
//! `max_iters`, `hard_quantize_at`, `pretrain_iters`, `diagnostics_every`,
//! `output_dir`, `jobs`, `p`, `n`, `k`, `noise`, `input_dim`, `hidden_dim`,
//! `classes`, `separation`, `train_n`, `test_n`, `activation` (`tanh` |
//! `relu`), `loss` (`softmax` | `squared`), `fuzz_samples`,
//! `export_datasets`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use proxgen_core::optim::Method;
use proxgen_core::precond::PrecondKind;
use proxgen_core::problems::{Activation, LossKind};
use proxgen_core::prox::Exponent;
use proxgen_core::schedule::{LambdaSchedule, MomentumSchedule, StepSchedule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    LassoRecovery,
    SparseMlp,
    QuantMlp,
    ProxFuzz,
}

impl Experiment {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "lasso-recovery" => Ok(Experiment::LassoRecovery),
            "sparse-mlp" => Ok(Experiment::SparseMlp),
            "quant-mlp" => Ok(Experiment::QuantMlp),
            "prox-fuzz" => Ok(Experiment::ProxFuzz),
            other => Err(CliError::config(format!(
                "unknown experiment '{other}' (expected lasso-recovery, sparse-mlp, quant-mlp or prox-fuzz)"
            ))),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Experiment::LassoRecovery => "lasso-recovery",
            Experiment::SparseMlp => "sparse-mlp",
            Experiment::QuantMlp => "quant-mlp",
            Experiment::ProxFuzz => "prox-fuzz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Zero,
    Gaussian(f64),
}

impl Init {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if s == "zero" {
            return Ok(Init::Zero);
        }
        if let Some(scale) = s.strip_prefix("gaussian:") {
            let scale: f64 = scale
                .parse()
                .map_err(|_| CliError::config(format!("bad gaussian init scale '{scale}'")))?;
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(CliError::config("gaussian init scale must be > 0"));
            }
            return Ok(Init::Gaussian(scale));
        }
        Err(CliError::config(format!(
            "bad init '{s}' (expected 'zero' or 'gaussian:SCALE')"
        )))
    }

    pub fn token(self) -> String {
        match self {
            Init::Zero => "zero".to_string(),
            Init::Gaussian(scale) => format!("gaussian:{scale}"),
        }
    }

    /// File-name-safe variant of [`Init::token`].
    pub fn file_tag(self) -> String {
        self.token().replace([':', '.'], "p")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaKind {
    Constant,
    Homotopy,
}

/// A fully resolved experiment configuration (defaults plus file plus CLI
/// overrides). One flat namespace shared by all experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub methods: Vec<Method>,
    pub qs: Vec<Exponent>,
    pub lambda_grid: Vec<f64>,
    pub lambda_kind: LambdaKind,
    pub epoch_length: u64,
    pub seeds: Vec<u64>,
    pub inits: Vec<Init>,
    pub alpha0: f64,
    pub decay_factor: f64,
    pub milestones: Vec<u64>,
    pub momentum_exponential: bool,
    pub rho0: f64,
    pub mu: f64,
    pub precond: PrecondKind,
    pub delta: f64,
    pub zeta: f64,
    pub batch_size: usize,
    pub max_iters: u64,
    pub hard_quantize_at: Option<u64>,
    pub pretrain_iters: u64,
    pub diagnostics_every: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
    // lasso instance
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub noise: f64,
    // mlp problem
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub classes: usize,
    pub separation: f64,
    pub train_n: usize,
    pub test_n: usize,
    pub activation: Activation,
    pub loss: LossKind,
    // prox fuzzing
    pub fuzz_samples: usize,
    pub export_datasets: bool,
}

impl ExperimentConfig {
    /// Stock configuration for an experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let ladder = vec![
            0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0,
        ];
        let mut cfg = ExperimentConfig {
            experiment,
            methods: vec![Method::ProxGen, Method::ProxSgd],
            qs: vec![Exponent::One, Exponent::Half],
            lambda_grid: ladder,
            lambda_kind: LambdaKind::Constant,
            epoch_length: 0, // 0 = one pass over the data (n / batch_size)
            seeds: vec![0, 1, 2, 3, 4],
            inits: vec![Init::Zero, Init::Gaussian(0.03)],
            alpha0: 0.001,
            decay_factor: 1.0,
            milestones: Vec::new(),
            momentum_exponential: false,
            rho0: 0.9,
            mu: 0.999,
            precond: PrecondKind::AdamEma { beta: 0.999 },
            delta: 1e-8,
            zeta: 0.0,
            batch_size: 10,
            max_iters: 20_000,
            hard_quantize_at: None,
            pretrain_iters: 1_500,
            diagnostics_every: 2_000,
            output_dir: PathBuf::from("out/lasso-recovery"),
            jobs: default_jobs(),
            p: 500,
            n: 100,
            k: 10,
            noise: 0.05,
            input_dim: 8,
            hidden_dim: 16,
            classes: 3,
            separation: 10.0,
            train_n: 360,
            test_n: 360,
            activation: Activation::Tanh,
            loss: LossKind::SoftmaxCrossEntropy,
            fuzz_samples: 10_000,
            export_datasets: true,
        };
        match experiment {
            Experiment::LassoRecovery => {}
            Experiment::SparseMlp => {
                cfg.methods = vec![Method::ProxGenW, Method::Subgradient];
                cfg.qs = vec![Exponent::One, Exponent::Half];
                cfg.lambda_grid = vec![0.0, 0.0005, 0.001, 0.002, 0.005, 0.01];
                cfg.seeds = vec![0, 1, 2];
                cfg.inits = vec![Init::Gaussian(0.3)];
                cfg.zeta = 0.2;
                cfg.batch_size = 32;
                cfg.max_iters = 3_000;
                cfg.diagnostics_every = 500;
                cfg.output_dir = PathBuf::from("out/sparse-mlp");
            }
            Experiment::QuantMlp => {
                cfg.methods = vec![Method::ProxQuantOriginal, Method::ProxGen];
                cfg.qs = vec![Exponent::One, Exponent::Half];
                cfg.lambda_grid = vec![1e-6, 1e-5, 1e-4];
                cfg.lambda_kind = LambdaKind::Homotopy;
                cfg.seeds = vec![0, 1, 2];
                cfg.inits = vec![Init::Gaussian(0.3)];
                cfg.alpha0 = 0.01;
                cfg.batch_size = 32;
                cfg.max_iters = 3_000;
                cfg.hard_quantize_at = Some(2_000);
                cfg.diagnostics_every = 500;
                cfg.output_dir = PathBuf::from("out/quant-mlp");
            }
            Experiment::ProxFuzz => {
                cfg.seeds = vec![0];
                cfg.qs = Exponent::ALL.to_vec();
                cfg.output_dir = PathBuf::from("out/prox-fuzz");
            }
        }
        cfg
    }

    /// Parses file contents on top of the experiment defaults.
    pub fn from_str(experiment: Experiment, text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(experiment);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| CliError::config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn scalar<T: std::str::FromStr>(v: &str, what: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad {what} '{v}'"))
        }
        fn list<T: std::str::FromStr>(v: &str, what: &str) -> Result<Vec<T>, String> {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',')
                .map(|s| scalar(s.trim(), what))
                .collect::<Result<Vec<T>, String>>()
        }

        match key {
            "experiment" => {
                let parsed = Experiment::parse(value).map_err(|e| e.to_string())?;
                if parsed != self.experiment {
                    return Err(format!(
                        "config file is for '{}', requested '{}'",
                        parsed.token(),
                        self.experiment.token()
                    ));
                }
            }
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|s| parse_method(s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "qs" => {
                self.qs = value
                    .split(',')
                    .map(|s| parse_exponent(s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "lambda_grid" => self.lambda_grid = list(value, "lambda")?,
            "lambda_schedule" => {
                self.lambda_kind = match value {
                    "constant" => LambdaKind::Constant,
                    "homotopy" => LambdaKind::Homotopy,
                    other => return Err(format!("bad lambda_schedule '{other}'")),
                }
            }
            "epoch_length" => self.epoch_length = scalar(value, "epoch_length")?,
            "seeds" => self.seeds = list(value, "seed")?,
            "inits" => {
                self.inits = value
                    .split(',')
                    .map(|s| Init::parse(s.trim()).map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?;
            }
            "alpha0" => self.alpha0 = scalar(value, "alpha0")?,
            "decay_factor" => self.decay_factor = scalar(value, "decay_factor")?,
            "milestones" => self.milestones = list(value, "milestone")?,
            "momentum" => {
                self.momentum_exponential = match value {
                    "constant" => false,
                    "exponential" => true,
                    other => return Err(format!("bad momentum kind '{other}'")),
                }
            }
            "rho0" => self.rho0 = scalar(value, "rho0")?,
            "mu" => self.mu = scalar(value, "mu")?,
            "precond" => {
                self.precond = match value {
                    "identity" => PrecondKind::Identity,
                    "adagrad" => PrecondKind::AdaGrad,
                    "adam-ema" => PrecondKind::AdamEma {
                        beta: match self.precond {
                            PrecondKind::AdamEma { beta } => beta,
                            _ => 0.999,
                        },
                    },
                    other => return Err(format!("bad precond '{other}'")),
                }
            }
            "beta" => {
                let beta = scalar(value, "beta")?;
                if let PrecondKind::AdamEma { .. } = self.precond {
                    self.precond = PrecondKind::AdamEma { beta };
                } else {
                    return Err("beta only applies to the adam-ema preconditioner".into());
                }
            }
            "delta" => self.delta = scalar(value, "delta")?,
            "zeta" => self.zeta = scalar(value, "zeta")?,
            "batch_size" => self.batch_size = scalar(value, "batch_size")?,
            "max_iters" => self.max_iters = scalar(value, "max_iters")?,
            "hard_quantize_at" => {
                self.hard_quantize_at = if value == "none" {
                    None
                } else {
                    Some(scalar(value, "hard_quantize_at")?)
                }
            }
            "pretrain_iters" => self.pretrain_iters = scalar(value, "pretrain_iters")?,
            "diagnostics_every" => self.diagnostics_every = scalar(value, "diagnostics_every")?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "jobs" => self.jobs = scalar(value, "jobs")?,
            "p" => self.p = scalar(value, "p")?,
            "n" => self.n = scalar(value, "n")?,
            "k" => self.k = scalar(value, "k")?,
            "noise" => self.noise = scalar(value, "noise")?,
            "input_dim" => self.input_dim = scalar(value, "input_dim")?,
            "hidden_dim" => self.hidden_dim = scalar(value, "hidden_dim")?,
            "classes" => self.classes = scalar(value, "classes")?,
            "separation" => self.separation = scalar(value, "separation")?,
            "train_n" => self.train_n = scalar(value, "train_n")?,
            "test_n" => self.test_n = scalar(value, "test_n")?,
            "activation" => {
                self.activation = match value {
                    "tanh" => Activation::Tanh,
                    "relu" => Activation::Relu,
                    other => return Err(format!("bad activation '{other}'")),
                }
            }
            "loss" => {
                self.loss = match value {
                    "softmax" => LossKind::SoftmaxCrossEntropy,
                    "squared" => LossKind::Squared,
                    other => return Err(format!("bad loss '{other}'")),
                }
            }
            "fuzz_samples" => self.fuzz_samples = scalar(value, "fuzz_samples")?,
            "export_datasets" => self.export_datasets = scalar(value, "export_datasets")?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.lambda_grid.is_empty() {
            return Err(CliError::config("lambda_grid must not be empty"));
        }
        if self.lambda_grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(CliError::config("lambda values must be finite and >= 0"));
        }
        if self.seeds.is_empty() {
            return Err(CliError::config("seeds must not be empty"));
        }
        if self.inits.is_empty() {
            return Err(CliError::config("inits must not be empty"));
        }
        if self.methods.is_empty() {
            return Err(CliError::config("methods must not be empty"));
        }
        if self.qs.is_empty() {
            return Err(CliError::config("qs must not be empty"));
        }
        if self.diagnostics_every == 0 {
            return Err(CliError::config("diagnostics_every must be >= 1"));
        }
        if self.jobs == 0 {
            return Err(CliError::config("jobs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(CliError::config("batch_size must be >= 1"));
        }
        if self.experiment == Experiment::ProxFuzz && self.fuzz_samples < 10_000 {
            return Err(CliError::config("fuzz_samples must be >= 10000"));
        }
        // schedules validate the numeric ranges
        self.step_schedule().map_err(CliError::from)?;
        self.momentum_schedule().map_err(CliError::from)?;
        self.lambda_schedule(self.lambda_grid[0])
            .map_err(CliError::from)?;
        Ok(())
    }

    pub fn step_schedule(&self) -> Result<StepSchedule, proxgen_core::CoreError> {
        if self.milestones.is_empty() {
            StepSchedule::constant(self.alpha0)
        } else {
            StepSchedule::step_decay(self.alpha0, self.decay_factor, self.milestones.clone())
        }
    }

    pub fn momentum_schedule(&self) -> Result<MomentumSchedule, proxgen_core::CoreError> {
        if self.momentum_exponential {
            MomentumSchedule::exponential(self.rho0, self.mu)
        } else {
            MomentumSchedule::constant(self.rho0)
        }
    }

    /// Iterations per epoch for the homotopy schedule: the configured
    /// `epoch_length`, or one pass over the training data when left at 0.
    pub fn resolved_epoch_length(&self, samples: usize) -> u64 {
        if self.epoch_length > 0 {
            self.epoch_length
        } else {
            (samples as u64).div_ceil(self.batch_size as u64).max(1)
        }
    }

    pub fn lambda_schedule(&self, base: f64) -> Result<LambdaSchedule, proxgen_core::CoreError> {
        match self.lambda_kind {
            LambdaKind::Constant => LambdaSchedule::constant(base),
            LambdaKind::Homotopy => {
                let samples = match self.experiment {
                    Experiment::LassoRecovery => self.n,
                    _ => self.train_n,
                };
                LambdaSchedule::homotopy(base, self.resolved_epoch_length(samples))
            }
        }
    }

    /// Flat key-value echo of the resolved configuration, in key order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.token().to_string());
        put(
            "methods",
            self.methods
                .iter()
                .map(|me| me.token())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "qs",
            self.qs
                .iter()
                .map(|q| q.token())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "lambda_grid",
            self.lambda_grid
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "lambda_schedule",
            match self.lambda_kind {
                LambdaKind::Constant => "constant".to_string(),
                LambdaKind::Homotopy => "homotopy".to_string(),
            },
        );
        put("epoch_length", self.epoch_length.to_string());
        put(
            "seeds",
            self.seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "inits",
            self.inits
                .iter()
                .map(|i| i.token())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("alpha0", self.alpha0.to_string());
        put("decay_factor", self.decay_factor.to_string());
        put(
            "milestones",
            self.milestones
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "momentum",
            if self.momentum_exponential {
                "exponential".to_string()
            } else {
                "constant".to_string()
            },
        );
        put("rho0", self.rho0.to_string());
        put("mu", self.mu.to_string());
        put("precond", self.precond.token().to_string());
        if let PrecondKind::AdamEma { beta } = self.precond {
            put("beta", beta.to_string());
        }
        put("delta", self.delta.to_string());
        put("zeta", self.zeta.to_string());
        put("batch_size", self.batch_size.to_string());
        put("max_iters", self.max_iters.to_string());
        put(
            "hard_quantize_at",
            self.hard_quantize_at
                .map_or_else(|| "none".to_string(), |v| v.to_string()),
        );
        put("pretrain_iters", self.pretrain_iters.to_string());
        put("diagnostics_every", self.diagnostics_every.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("jobs", self.jobs.to_string());
        match self.experiment {
            Experiment::LassoRecovery => {
                put("p", self.p.to_string());
                put("n", self.n.to_string());
                put("k", self.k.to_string());
                put("noise", self.noise.to_string());
            }
            Experiment::SparseMlp | Experiment::QuantMlp => {
                put("input_dim", self.input_dim.to_string());
                put("hidden_dim", self.hidden_dim.to_string());
                put("classes", self.classes.to_string());
                put("separation", self.separation.to_string());
                put("train_n", self.train_n.to_string());
                put("test_n", self.test_n.to_string());
                put(
                    "activation",
                    match self.activation {
                        Activation::Tanh => "tanh".to_string(),
                        Activation::Relu => "relu".to_string(),
                    },
                );
                put(
                    "loss",
                    match self.loss {
                        LossKind::SoftmaxCrossEntropy => "softmax".to_string(),
                        LossKind::Squared => "squared".to_string(),
                    },
                );
            }
            Experiment::ProxFuzz => {
                put("fuzz_samples", self.fuzz_samples.to_string());
            }
        }
        put("export_datasets", self.export_datasets.to_string());
        m
    }
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "proxgen" => Ok(Method::ProxGen),
        "proxgen-w" => Ok(Method::ProxGenW),
        "prox-sgd" => Ok(Method::ProxSgd),
        "subgradient" => Ok(Method::Subgradient),
        "proxquant-original" => Ok(Method::ProxQuantOriginal),
        other => Err(format!("unknown method '{other}'")),
    }
}

pub fn parse_exponent(s: &str) -> Result<Exponent, String> {
    match s {
        "0" => Ok(Exponent::Zero),
        "1/2" | "0.5" => Ok(Exponent::Half),
        "2/3" => Ok(Exponent::TwoThirds),
        "1" => Ok(Exponent::One),
        other => Err(format!("unknown exponent '{other}' (expected 0, 1/2, 2/3 or 1)")),
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        for exp in [
            Experiment::LassoRecovery,
            Experiment::SparseMlp,
            Experiment::QuantMlp,
            Experiment::ProxFuzz,
        ] {
            let cfg = ExperimentConfig::from_str(exp, "").unwrap();
            assert_eq!(cfg.experiment, exp);
        }
    }

    #[test]
    fn key_value_overrides_apply() {
        let text = "\
# comment
seeds = 7, 8
lambda_grid = 0.1, 0.2
batch_size = 25
inits = gaussian:0.5
precond = adam-ema
beta = 0.99
";
        let cfg = ExperimentConfig::from_str(Experiment::LassoRecovery, text).unwrap();
        assert_eq!(cfg.seeds, vec![7, 8]);
        assert_eq!(cfg.lambda_grid, vec![0.1, 0.2]);
        assert_eq!(cfg.batch_size, 25);
        assert_eq!(cfg.inits, vec![Init::Gaussian(0.5)]);
        assert_eq!(cfg.precond, PrecondKind::AdamEma { beta: 0.99 });
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = ExperimentConfig::from_str(Experiment::LassoRecovery, "frobnicate = 1")
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown key"), "{err}");
    }

    #[test]
    fn empty_grids_are_rejected() {
        assert!(ExperimentConfig::from_str(Experiment::LassoRecovery, "lambda_grid =").is_err());
        assert!(ExperimentConfig::from_str(Experiment::LassoRecovery, "seeds =").is_err());
    }

    #[test]
    fn experiment_mismatch_is_an_error() {
        let err = ExperimentConfig::from_str(Experiment::SparseMlp, "experiment = lasso-recovery");
        assert!(err.is_err());
    }
}
