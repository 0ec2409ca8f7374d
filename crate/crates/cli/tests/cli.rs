//! End-to-end tests of the `proxgen` binary and the experiment harness:
//! exit codes, CLI overrides, output shapes and the library-level
//! reduction checks the experiments promise.

use std::fs;
use std::path::Path;
use std::process::Command;

use proxgen_cli::config::{Experiment, ExperimentConfig};
use proxgen_cli::experiments::{fuzz_operator, run_experiment};
use proxgen_core::prox::{Exponent, Family};

fn proxgen_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proxgen"))
}

fn write_cfg(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path
}

const TINY_LASSO: &str = "\
seeds = 0
qs = 1
lambda_grid = 0.05
max_iters = 200
diagnostics_every = 100
p = 60
n = 30
k = 5
";

#[test]
fn exit_zero_on_success_and_outputs_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), TINY_LASSO);
    let out = dir.path().join("results");
    let status = proxgen_bin()
        .args(["lasso-recovery", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    assert!(out.join("summary.csv").is_file());
    assert!(out.join("config_echo.json").is_file());
    assert!(out.join("dataset_seed0.csv").is_file());

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert!(lines.next().unwrap().starts_with("# generated_at_unix="));
    let header = lines.next().unwrap();
    for col in ["method", "q", "lambda", "seed", "init"] {
        assert!(header.split(',').any(|h| h == col), "missing column {col}");
    }
    // 1 seed x 2 inits x (proxgen + prox-sgd) x 1 lambda
    assert_eq!(lines.count(), 4);

    // every referenced records file exists and has the documented header
    for line in summary.lines().skip(2) {
        let records = line.split(',').next_back().unwrap();
        let text = fs::read_to_string(out.join(records)).unwrap();
        assert!(text.starts_with("t,objective,stationarity_bound,sparsity,"));
    }

    let echo = fs::read_to_string(out.join("config_echo.json")).unwrap();
    assert!(echo.contains("\"experiment\": \"lasso-recovery\""));
    assert!(echo.contains("\"max_iters\": \"200\""));
}

#[test]
fn exit_one_on_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "no_such_key = 1\n");
    let output = proxgen_bin()
        .args(["lasso-recovery", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown key"));

    // unknown experiment name
    let output = proxgen_bin().arg("no-such-experiment").output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    // empty lambda grid
    let cfg = write_cfg(dir.path(), "lambda_grid =\n");
    let output = proxgen_bin()
        .args(["lasso-recovery", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn exit_two_on_partial_grid_failure() {
    // an absurd stepsize on the identity metric overflows within a few
    // iterations; the cell is recorded as diverged and the sweep finishes
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "\
seeds = 0
inits = gaussian:1.0
qs = 1
lambda_grid = 0.0001
precond = identity
alpha0 = 1000000000
max_iters = 60
diagnostics_every = 60
p = 40
n = 20
k = 4
",
    );
    let out = dir.path().join("results");
    let output = proxgen_bin()
        .args(["lasso-recovery", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "stdout: {}", String::from_utf8_lossy(&output.stdout));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("diverged@"), "{summary}");
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), TINY_LASSO);
    let out = dir.path().join("results");
    let status = proxgen_bin()
        .args(["lasso-recovery", "--config"])
        .arg(&cfg)
        .args(["--seed", "7", "--seed", "9", "--jobs", "1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    for line in summary.lines().skip(2) {
        let seed = line.split(',').nth(5).unwrap();
        assert!(seed == "7" || seed == "9", "unexpected seed in {line}");
    }
}

#[test]
fn quant_mlp_lambda_zero_reduction() {
    // with lambda = 0 and the quantize snap at the very end, the Euclidean
    // and metric prox methods follow identical trajectories, so their
    // reported accuracies coincide
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_str(
        Experiment::QuantMlp,
        "\
seeds = 0
qs = 1
lambda_grid = 0.0
max_iters = 400
pretrain_iters = 400
hard_quantize_at = 400
diagnostics_every = 200
train_n = 120
test_n = 120
",
    )
    .unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    cfg.export_datasets = false;
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.failed_cells, 0);
    assert_eq!(outcome.rows.len(), 2);
    let field = |row: &str, i: usize| row.split(',').nth(i).unwrap().to_string();
    let cols: Vec<&str> = outcome.header.split(',').collect();
    let pre = cols.iter().position(|c| *c == "pre_quant_accuracy").unwrap();
    let post = cols.iter().position(|c| *c == "post_quant_accuracy").unwrap();
    assert_eq!(field(&outcome.rows[0], pre), field(&outcome.rows[1], pre));
    assert_eq!(field(&outcome.rows[0], post), field(&outcome.rows[1], post));
}

#[test]
fn sparse_mlp_lambda_zero_accuracies_match() {
    // both methods fit the separable data perfectly without regularization
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_str(
        Experiment::SparseMlp,
        "\
seeds = 0
qs = 1
lambda_grid = 0.0
diagnostics_every = 1000
",
    )
    .unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    cfg.export_datasets = false;
    let outcome = run_experiment(&cfg).unwrap();
    assert_eq!(outcome.failed_cells, 0);
    let cols: Vec<&str> = outcome.header.split(',').collect();
    let acc = cols.iter().position(|c| *c == "test_accuracy").unwrap();
    let accs: Vec<String> = outcome
        .rows
        .iter()
        .map(|r| r.split(',').nth(acc).unwrap().to_string())
        .collect();
    assert_eq!(accs.len(), 2);
    assert_eq!(accs[0], accs[1], "accuracies differ at lambda = 0: {accs:?}");
}

#[test]
fn fuzz_summary_has_operator_and_count_columns() {
    // quick fuzz sanity at a reduced sample count through the library API
    let report = fuzz_operator(Family::SparseLq, Exponent::Half, 300, 1);
    assert_eq!(report.samples, 300);
    assert!(report.max_gap <= 1e-8);
    assert_eq!(report.dead_zone_violations, 0);

    // the experiment itself enforces the 10^4 minimum
    let err = ExperimentConfig::from_str(Experiment::ProxFuzz, "fuzz_samples = 100");
    assert!(err.is_err());
}
