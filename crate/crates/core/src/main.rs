use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use mmab::analysis::{bound_thm1, bound_thm2, BoundInput};
use mmab::environment::build_counterexample;
use mmab::output::{emit_csv, metadata_path};
use mmab::{parse_config, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mmab", version, about = "Multi-player bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV plus metadata sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the gap-dependent and gap-independent mUCB bounds for the
    /// configured environment.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate the probability of the lock-in event on the counterexample.
    Counterexample {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&bytes).with_context(|| format!("invalid config {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Run {
            config,
            seed,
            runs,
            horizon,
            out,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(o) = out {
                cfg.output_path = o;
            }
            cfg.validate().context("invalid overrides")?;
            let result = run_experiment::<f64>(&cfg)?;
            emit_csv(&result, &cfg.output_path)
                .with_context(|| format!("writing {}", cfg.output_path.display()))?;
            let last = result.mean.len() - 1;
            writeln!(
                stdout,
                "{} runs of {} under {}: mean pseudo-regret at t={} is {} (std {})",
                cfg.runs,
                cfg.algorithm,
                cfg.variant,
                result.grid[last],
                result.mean[last],
                result.std[last]
            )?;
            writeln!(
                stdout,
                "wrote {} and {}",
                cfg.output_path.display(),
                metadata_path(&cfg.output_path).display()
            )?;
        }
        Command::Bounds { config } => {
            let cfg = load(&config)?;
            if cfg.horizon < 2 {
                bail!("bounds need horizon >= 2");
            }
            let env = cfg.build_environment::<f64>()?;
            let input = BoundInput::new(env.gaps().to_vec(), cfg.horizon as f64)?;
            writeln!(stdout, "horizon = {}", cfg.horizon)?;
            writeln!(stdout, "k_max = {}", input.k_max())?;
            writeln!(stdout, "gap_dependent = {}", bound_thm1(&input))?;
            writeln!(stdout, "gap_independent = {}", bound_thm2(&input))?;
        }
        Command::Counterexample { trials, seed } => {
            let env = build_counterexample::<f64>();
            let est = env.estimate_bad_event(trials, seed)?;
            let (lo, hi) = est.interval(3.0);
            writeln!(stdout, "trials = {}", est.trials)?;
            writeln!(stdout, "hits = {}", est.hits)?;
            writeln!(stdout, "p_hat = {}", est.p_hat)?;
            writeln!(stdout, "std_error = {}", est.std_error)?;
            writeln!(stdout, "interval_3sigma = [{lo}, {hi}]")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe, as in `mmab bounds ... | head -1`, is not a failure.
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
