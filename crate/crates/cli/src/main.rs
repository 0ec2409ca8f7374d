use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use proxgen_cli::{config::Experiment, run_experiment, CliError, ExperimentConfig};

/// Experiment runner for the proxgen optimizers.
///
/// Exit codes: 0 on full success, 1 on configuration errors, 2 when some
/// grid cells failed but the sweep completed.
#[derive(Parser, Debug)]
#[command(name = "proxgen", version, about)]
struct Cli {
    /// Experiment to run: lasso-recovery, sparse-mlp, quant-mlp or prox-fuzz
    experiment: String,

    /// Flat key-value config file; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// Parallel grid cells (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,

    /// Override the seed list (repeatable)
    #[arg(long = "seed")]
    seeds: Vec<u64>,

    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let experiment = Experiment::parse(&cli.experiment)?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ExperimentConfig::from_str(experiment, &text)?
        }
        None => ExperimentConfig::defaults(experiment),
    };
    if !cli.seeds.is_empty() {
        cfg.seeds = cli.seeds.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("proxgen: {e}");
            return ExitCode::from(1);
        }
    };

    match run_experiment(&cfg) {
        Ok(outcome) => {
            println!(
                "{}: {} cells, {} failed -> {}",
                cfg.experiment.token(),
                outcome.total_cells,
                outcome.failed_cells,
                outcome.summary_path.display()
            );
            if outcome.failed_cells > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("proxgen: {e}");
            ExitCode::from(1)
        }
    }
}
