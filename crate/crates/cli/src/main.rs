use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strichartz_lab::{load_config, run, ExperimentKind, RunOptions, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

#[derive(Parser, Debug)]
#[command(name = "strichartz-lab", version, about = "Run dispersive-estimate experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "STRICHARTZ_LAB_THREADS")]
    threads: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    KernelSweep(Common),
    VdcOracle(Common),
    StrichartzFit(Common),
    OnsSweep(Common),
    DualityCheck(Common),
    HartreeRun(Common),
    FixedPoint(Common),
    /// Parse and validate a config, print it with defaults filled in.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::ValidateConfig { config } => {
            return match load_config(&config) {
                Ok(cfg) => {
                    println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
                    code(EXIT_PASS)
                }
                Err(e) => {
                    eprintln!("{e}");
                    code(EXIT_CONFIG)
                }
            };
        }
        Command::KernelSweep(c) => (ExperimentKind::KernelSweep, c),
        Command::VdcOracle(c) => (ExperimentKind::VdcOracle, c),
        Command::StrichartzFit(c) => (ExperimentKind::StrichartzFit, c),
        Command::OnsSweep(c) => (ExperimentKind::OnsSweep, c),
        Command::DualityCheck(c) => (ExperimentKind::DualityCheck, c),
        Command::HartreeRun(c) => (ExperimentKind::HartreeRun, c),
        Command::FixedPoint(c) => (ExperimentKind::FixedPoint, c),
    };
    let cfg = match load_config(&common.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return code(EXIT_CONFIG);
        }
    };
    if cfg.kind() != kind {
        eprintln!("config error: config describes `{}`, but `{kind}` was requested", cfg.kind());
        return code(EXIT_CONFIG);
    }
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return code(EXIT_FAIL);
        }
    }
    let opts = RunOptions {
        out: common.out,
        seed: common.seed,
        strict: common.strict,
    };
    match run(cfg, &opts) {
        Ok(report) => {
            let o = &report.outcome;
            eprintln!(
                "{kind}: {}/{} cells passed, {}/{} checks passed, artifacts in {}",
                o.cells_passed(),
                o.rows.len(),
                o.checks.iter().filter(|c| c.pass).count(),
                o.checks.len(),
                report.out_dir.display()
            );
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            for c in o.checks.iter().filter(|c| !c.pass) {
                eprintln!("failed check {}: {} (expected {})", c.name, c.value, c.condition);
            }
            code(report.exit_code)
        }
        Err(e) => {
            eprintln!("cannot write results: {e}");
            code(EXIT_FAIL)
        }
    }
}
