//! Experiment harness: parse a JSON config, run its cells, and write
//! `results.csv`, `summary.json` and `manifest.json`.

pub mod config;
pub mod experiments;
pub mod report;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::execute;
pub use report::{Check, Outcome, Row, Value};

/// Exit status when every cell and check passes.
pub const EXIT_PASS: i32 = 0;
/// Some cell or check failed (or a warning under `--strict`).
pub const EXIT_FAIL: i32 = 1;
/// The config could not be read, parsed or validated.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out: Option<PathBuf>,
    /// Overrides `seed`.
    pub seed: Option<u64>,
    /// Treat warnings as failures.
    pub strict: bool,
}

/// What a finished run wrote and how it went.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub out_dir: PathBuf,
    pub exit_code: i32,
}

/// Applies command-line overrides to a parsed config.
pub fn apply_overrides(cfg: &mut ExperimentConfig, opts: &RunOptions) {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output.dir = Some(out.clone());
    }
}

/// Runs a validated config and writes its artifacts.
pub fn run(mut cfg: ExperimentConfig, opts: &RunOptions) -> io::Result<RunReport> {
    apply_overrides(&mut cfg, opts);
    cfg.materialize();
    let start = Instant::now();
    let outcome = execute(&cfg);
    let duration_ms = start.elapsed().as_secs_f64() * 1e3;

    let passed = outcome.passed() && !(opts.strict && !outcome.warnings.is_empty());
    let exit_code = if passed { EXIT_PASS } else { EXIT_FAIL };
    let out_dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&out_dir)?;

    let id = cfg.id.clone().unwrap_or_else(|| cfg.kind().to_string());
    let csv = report::render_csv(&id, &outcome).map_err(io::Error::other)?;
    report::write_atomic(&out_dir.join(&cfg.output.results), &csv)?;

    let summary = json!({
        "config_echo": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "cells_total": outcome.rows.len(),
        "cells_passed": outcome.cells_passed(),
        "fits": outcome.fits,
        "duration_ms": duration_ms,
    });
    write_json(&out_dir.join(&cfg.output.summary), &summary)?;

    let manifest = json!({
        "experiment": cfg.kind(),
        "experiment_id": id,
        "pass": passed,
        "exit_code": exit_code,
        "strict": opts.strict,
        "cells": outcome
            .rows
            .iter()
            .map(|r| json!({"cell_index": r.cell_index, "pass": r.pass, "error": r.error}))
            .collect::<Vec<_>>(),
        "checks": outcome.checks,
        "warnings": outcome.warnings,
    });
    write_json(&out_dir.join(&cfg.output.manifest), &manifest)?;

    Ok(RunReport {
        outcome,
        out_dir,
        exit_code,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    report::write_atomic(path, &text)
}

/// Reads and parses a config file; I/O failures become config errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        path: String::new(),
        line: None,
        column: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}
