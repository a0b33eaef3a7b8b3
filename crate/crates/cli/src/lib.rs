//! Manifest-driven batch runner for `fdrisk`.
//!
//! `fdrisk run manifest.json` parses the manifest, builds one backend (binomial tree
//! or Monte Carlo path ensemble), runs every task and writes `<task id>.csv` per task
//! plus `summary.json`. Exit codes: 0 all checks passed, 1 a check failed or a task
//! errored, 2 configuration error.

pub mod error;
pub mod manifest;
pub mod output;
pub mod runner;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

pub use error::CliError;
pub use manifest::Manifest;
use manifest::Format;
use output::{json_num, to_json, write_atomic};
use runner::{Context, Outcome, Status};

pub const SUMMARY_FORMAT: &str = "fdrisk-summary/1";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MEASURE_CHANGE: &str = "dQ/dP = exp(int q dB - 1/2 int |q|^2 ds); B - int q ds is a Q-Brownian motion";

#[derive(Debug, Parser)]
#[command(name = "fdrisk", version, about = "Run fully-dynamic risk measure experiments from a JSON manifest")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute every task of a manifest.
    Run {
        manifest: PathBuf,
        /// Output directory (default: the manifest's `output.dir`, relative to the manifest).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Maximum number of tasks run concurrently.
        #[arg(long)]
        workers: Option<usize>,
        /// Tolerance for every verdict, overriding the manifest.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tolerance: Option<f64>,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub summary: Value,
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::Run { manifest, output_dir, workers, tolerance } => {
            match run_manifest(&manifest, &RunOptions { output_dir, workers, tolerance }) {
                Ok(r) => {
                    for t in r.summary["tasks"].as_array().into_iter().flatten() {
                        eprintln!("{} {} {}", t["status"].as_str().unwrap_or(""), t["id"].as_str().unwrap_or(""), t["type"].as_str().unwrap_or(""));
                        if let Some(e) = t["error"].as_str() {
                            eprintln!("  {e}");
                        }
                    }
                    r.exit_code
                }
                Err(e) => {
                    eprintln!("fdrisk: {e}");
                    e.exit_code()
                }
            }
        }
    }
}

/// Parses, runs and writes the reports of one manifest.
pub fn run_manifest(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest = Manifest::parse(&text)?;
    if let Some(t) = opts.tolerance {
        if !(t >= 0.0) {
            return Err(CliError::config("", "--tolerance must be non-negative"));
        }
    }
    let out_dir = match &opts.output_dir {
        Some(d) => d.clone(),
        None => path.parent().unwrap_or(Path::new(".")).join(&manifest.output.dir),
    };
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let workers = opts.workers.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config("", format!("worker pool: {e}")))?;

    let csv = manifest.output.formats.contains(&Format::Csv);
    let ctx_result = pool.install(|| Context::new(&manifest, opts.tolerance));
    let outcomes: Vec<Outcome> = match &ctx_result {
        Ok(ctx) => pool.install(|| manifest.tasks.par_iter().map(|t| ctx.run(t)).collect()),
        Err(e) => manifest.tasks.iter().map(|t| Outcome::failed(format!("task {}: backend: {e}", t.id()))).collect(),
    };

    let mut entries = Vec::new();
    let mut exit_code = 0;
    let (mut checks, mut failed) = (0usize, 0usize);
    for (task, o) in manifest.tasks.iter().zip(&outcomes) {
        let mut file = Value::Null;
        let mut rows = 0;
        if let (true, Some(table)) = (csv, &o.table) {
            let name = format!("{}.csv", task.id());
            write_atomic(&out_dir.join(&name), &table.to_csv())?;
            file = Value::from(name);
            rows = table.len();
        }
        if matches!(o.status, Status::Pass | Status::Fail) {
            checks += 1;
        }
        if matches!(o.status, Status::Fail | Status::Error) {
            failed += 1;
            exit_code = 1;
        }
        let metrics: Map<String, Value> = o.metrics.clone().into_iter().collect();
        entries.push(json!({
            "id": task.id(),
            "type": task.type_name,
            "status": o.status.as_str(),
            "file": file,
            "rows": rows,
            "metrics": metrics,
            "notes": o.notes,
            "error": o.error,
        }));
    }
    let mut mc = Value::Null;
    if let Some(m) = &manifest.mc {
        mc = json!({
            "paths": m.paths, "seed": m.seed, "degree": m.degree,
            "z_clip": json_num(m.z_clip), "antithetic": m.antithetic, "dim": m.dim,
        });
    }
    let summary = json!({
        "format": SUMMARY_FORMAT,
        "backend": manifest.backend.to_string(),
        "grid": {"T": json_num(manifest.grid.horizon), "N": manifest.grid.steps},
        "mc": mc,
        "tolerance": json_num(opts.tolerance.unwrap_or(manifest.tolerance)),
        "measure_change": MEASURE_CHANGE,
        "tasks": entries,
        "checks": {"total": checks, "failed": failed},
        "exit_code": exit_code,
    });
    if manifest.output.formats.contains(&Format::Json) {
        write_atomic(&out_dir.join(SUMMARY_FILE), &to_json(&summary))?;
    }
    Ok(RunReport { exit_code, output_dir: out_dir, summary })
}
