//! `pbm`: run pilot-brownian experiments from a TOML configuration.

mod check;
mod config;
mod experiments;
mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pilot_brownian::rng::derive_seed;
use serde_json::Value;

use crate::config::RunConfig;
use crate::experiments::Experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pilot_brownian::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pilot_brownian::Error as E;
        match self {
            CliError::Core(E::Unstable { .. } | E::PhaseUnwrap { .. } | E::SingularFit(_) | E::InsufficientData(_)) => {
                3
            }
            CliError::CheckFailed(_) => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pbm", version, about = "Quantum Brownian motion experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "PBM_WORKERS")]
    workers: Option<usize>,
    /// Output directory (overrides the file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dotted-path override such as `bath.gamma0=0.5`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discrete kernel and zero-point constant against the continuum.
    BathCheck,
    /// Monte Carlo force statistics against the analytic correlator.
    Correlator,
    /// Generalized Langevin ensemble with mean-square displacement fit.
    Gle,
    /// Markovian Langevin ensemble with mean-square displacement fit.
    Markovian,
    /// Relaxation of rho towards |psi|^2 and the H-functional.
    Relax,
    /// Schrödinger-Langevin evolution with Bohmian trajectories.
    Kostin,
    /// Free-electron diffusion estimate for gold.
    Gold,
    /// One run per value of a numeric parameter.
    Sweep {
        experiment: Experiment,
        /// Dotted parameter path.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Fast checks against closed forms; exits with status 4 on failure.
    Check,
}

fn resolve(cli: &Cli, extra: &[String]) -> Result<RunConfig, CliError> {
    let mut overrides = cli.set.clone();
    overrides.extend_from_slice(extra);
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir.clone_from(out);
    }
    Ok(cfg)
}

fn with_pool<T>(workers: usize, work: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(work)
}

fn execute(experiment: Experiment, cfg: &RunConfig, dir: &std::path::Path) -> Result<Value, CliError> {
    let start = Instant::now();
    let outcome = experiments::run(experiment, cfg)?;
    let wall = start.elapsed().as_secs_f64();
    output::write_run(dir, experiment, cfg, rayon::current_num_threads(), wall, &outcome)?;
    Ok(output::summary_record(experiment, cfg.seed, &outcome))
}

fn sweep(cli: &Cli, experiment: Experiment, axis: &str, values: &[String]) -> Result<(), CliError> {
    let base = resolve(cli, &[])?;
    if values.is_empty() {
        log::info!("sweep over `{axis}` has no values; nothing to do");
        return Ok(());
    }
    if base.numeric(axis).is_none() {
        return Err(CliError::Config(match config::nearest_key(axis) {
            Some(k) if !RunConfig::keys().contains(&axis.to_string()) => {
                format!("unknown parameter `{axis}`; did you mean `{k}`?")
            }
            _ => format!("sweep axis `{axis}` is not a numeric parameter"),
        }));
    }
    let summaries = with_pool(base.workers, || {
        let mut summaries = Vec::with_capacity(values.len());
        for (i, value) in values.iter().enumerate() {
            let mut cfg = resolve(cli, &[format!("{axis}={value}")])?;
            cfg.seed = derive_seed(base.seed, i as u64);
            let dir = base.output_dir.join(format!("run_{i:03}"));
            let summary = execute(experiment, &cfg, &dir)?;
            summaries.push((cfg.numeric(axis).unwrap_or(f64::NAN), summary));
        }
        Ok(summaries)
    })?;
    let keys: BTreeSet<String> = summaries
        .iter()
        .flat_map(|(_, s)| s.as_object().into_iter().flat_map(|m| m.keys().cloned()))
        .filter(|k| k != "experiment" && k != "seed")
        .collect();
    let mut w = csv::Writer::from_path(base.output_dir.join("sweep.csv"))?;
    w.write_record(std::iter::once(axis.to_string()).chain(keys.iter().cloned()))?;
    let mut lines = String::new();
    for (x, s) in &summaries {
        let cell = |k: &String| match s.get(k) {
            Some(Value::Number(n)) => n.to_string(),
            Some(Value::Bool(b)) => b.to_string(),
            Some(Value::String(t)) => t.clone(),
            _ => String::new(),
        };
        w.write_record(std::iter::once(x.to_string()).chain(keys.iter().map(cell)))?;
        lines.push_str(&serde_json::to_string(s)?);
        lines.push('\n');
    }
    w.flush()?;
    std::fs::write(base.output_dir.join("sweep.jsonl"), lines)?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let experiment = match &cli.command {
        Command::BathCheck => Experiment::BathCheck,
        Command::Correlator => Experiment::Correlator,
        Command::Gle => Experiment::Gle,
        Command::Markovian => Experiment::Markovian,
        Command::Relax => Experiment::Relax,
        Command::Kostin => Experiment::Kostin,
        Command::Gold => Experiment::Gold,
        Command::Sweep {
            experiment,
            axis,
            values,
        } => return sweep(cli, *experiment, axis, values),
        Command::Check => {
            let results = check::run_checks();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            return if failed == 0 {
                Ok(())
            } else {
                Err(CliError::CheckFailed(failed))
            };
        }
    };
    let cfg = resolve(cli, &[])?;
    let summary = with_pool(cfg.workers, || execute(experiment, &cfg, &cfg.output_dir))?;
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(pilot_brownian::Error::Unstable { suggested_dt, .. }) = &e {
                eprintln!("hint: try dt <= {suggested_dt:.3e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
