//! `fusetrack` command line: simulate sensor logs, run filter stacks, and
//! summarize run CSV files.
//!
//! Exit codes: 0 on success, 1 for configuration or input errors, 2 when a
//! filter diverges (the partial CSV is still written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use fusetrack::config::{FilterKind, ScenarioConfig};
use fusetrack::metrics::{compute_any, Metrics};
use fusetrack::scenario::{run_log, run_scenario, RunOutput};
use fusetrack::sim::{simulate, SensorLog};
use fusetrack::Error;

#[derive(Parser)]
#[command(name = "fusetrack", version, about = "IMU + vision fusion tracking simulator and filter harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file; defaults apply to every key it does not set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a simulated sensor log.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run a filter on a simulated scenario or a recorded log.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "fused", value_parser = parse_filter)]
        filter: FilterKind,
        /// Sensor log to run instead of simulating. Ground truth is then
        /// unknown and no metrics are computed.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Independent runs with seeds `seed, seed + 1, ...`, in parallel.
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Summarize a run CSV.
    Metrics { csv: PathBuf },
    /// Print the effective configuration.
    DumpConfig {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_filter(s: &str) -> Result<FilterKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Config(String),
    Diverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => {
            let mut c = ScenarioConfig::default();
            c.finish()?;
            c
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes the CSV (and metrics when truth is known) of one run.
fn finish_run(out: &RunOutput, dir: &Path, stem: &str, with_metrics: bool) -> Result<Option<Metrics>, Failure> {
    let csv = out.to_csv();
    write(&dir.join(format!("{stem}.csv")), &csv)?;
    if let Some(e) = &out.failure {
        return Err(Failure::Diverged(format!("{stem}: filter diverged: {e} (partial CSV written)")));
    }
    if !with_metrics {
        return Ok(None);
    }
    let m = compute_any(&csv)?;
    write(&dir.join(format!("{stem}_metrics.txt")), &m.to_text())?;
    Ok(Some(m))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { common } => {
            let cfg = load(&common)?;
            let sim = simulate(&cfg.sim, cfg.seed)?;
            let path = cfg.output_dir.join("sensor_log.csv");
            write(&path, &sim.log.to_csv())?;
            println!("wrote {} ({} frames, {} IMU samples)", path.display(), sim.log.frames.len(), sim.log.imu_count());
        }
        Command::Run { common, filter, log, runs } => {
            let cfg = load(&common)?;
            let dir = cfg.output_dir.clone();
            let name = filter.as_str();
            if let Some(log_path) = log {
                let text = std::fs::read_to_string(&log_path).map_err(|e| Failure::Config(format!("{}: {e}", log_path.display())))?;
                let out = run_log(&cfg, &SensorLog::from_csv(&text)?, None, filter)?;
                finish_run(&out, &dir, name, false)?;
                println!("wrote {}", dir.join(format!("{name}.csv")).display());
                return Ok(());
            }
            if runs <= 1 {
                let out = run_scenario(&cfg, filter)?;
                if let Some(m) = finish_run(&out, &dir, name, true)? {
                    print!("{}", m.to_text());
                }
                return Ok(());
            }
            let results: Vec<(u64, Result<Option<Metrics>, Failure>)> = (0..runs)
                .into_par_iter()
                .map(|i| {
                    let mut c = cfg.clone();
                    c.seed = cfg.seed + i;
                    let r = run_scenario(&c, filter).map_err(Failure::from).and_then(|out| finish_run(&out, &dir, &format!("{name}_seed{}", c.seed), true));
                    (c.seed, r)
                })
                .collect();
            let mut failure = None;
            for (seed, r) in results {
                match r {
                    Ok(Some(m)) => println!("seed {seed}\n{}", m.to_text()),
                    Ok(None) => {}
                    Err(f) => failure = failure.or(Some(f)),
                }
            }
            if let Some(f) = failure {
                return Err(f);
            }
        }
        Command::Metrics { csv } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| Failure::Config(format!("{}: {e}", csv.display())))?;
            print!("{}", compute_any(&text)?.to_text());
        }
        Command::DumpConfig { common } => print!("{}", load(&common)?.dump()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
