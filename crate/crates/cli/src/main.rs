//! fastdrive: experiment runner for dissipative-evolution simulations.
//!
//! Each subcommand loads a JSON config, runs the experiment, and writes CSV
//! data plus a JSON summary into the output directory. Outputs are
//! byte-identical for identical `(config, seed)` regardless of `--workers`.
//!
//! Exit codes: 0 on success, 2 on configuration/schema errors, 3 when a
//! numeric guard refuses the requested regime.

mod config;
mod matrixjson;
mod runners;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "fastdrive",
    about = "Dissipative-phase simulation experiments",
    version
)]
struct Cli {
    /// Experiment kind; must match the config's `experiment` field.
    #[arg(value_parser = [
        "channels", "timer", "switch", "compile", "qa", "condense", "nogo", "spt", "evolve",
    ])]
    experiment: String,
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and summary files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweep entries.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match config::parse_config(&text, &cli.experiment) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build_global()
    {
        eprintln!("error: worker pool: {e}");
        return ExitCode::from(1);
    }
    eprintln!("running `{}` with seed {}", cfg.experiment, cfg.seed);
    let artifacts = match runners::run(&cfg) {
        Ok(a) => a,
        Err(runners::RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(runners::RunError::NumericGuard(msg)) => {
            eprintln!("error: numeric guard: {msg}");
            return ExitCode::from(3);
        }
        Err(runners::RunError::Other(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    // All computation succeeded; only now touch the filesystem.
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(1);
    }
    let mut summary = artifacts.summary;
    summary["seed"] = serde_json::json!(cfg.seed);
    summary["schema_version"] = serde_json::json!(config::SCHEMA_VERSION);
    for (name, contents) in &artifacts.csvs {
        let path = cli.out.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
        println!("wrote {}", path.display());
    }
    let spath = cli.out.join(format!("{}_summary.json", cfg.prefix));
    let pretty = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Err(e) = std::fs::write(&spath, pretty) {
        eprintln!("error: cannot write {}: {e}", spath.display());
        return ExitCode::from(1);
    }
    println!("wrote {}", spath.display());
    ExitCode::SUCCESS
}
