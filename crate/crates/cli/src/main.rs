//! `subexp` command-line runner: reads a JSON experiment file, runs it and
//! writes CSV, JSON and SVG artifacts with a hashed report.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod config;
mod plan;
mod report;
mod run;
mod selftest;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use subexp::ruinsets::RuinSetDescriptor;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "subexp", version, about = "Multivariate subexponential ruin experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Validate and print the resolved plan without sampling.
        #[arg(long)]
        dry_run: bool,
    },
    /// Run the fast built-in checks.
    Selftest {
        #[arg(long, default_value_t = 20240917)]
        seed: u64,
        /// JSON direction table `{"dim": d, "directions": [[...], ...]}` to check
        /// instead of the built-in tables.
        #[arg(long)]
        directions: Option<PathBuf>,
    },
    /// Print the directions of a ruin-set descriptor and sample memberships.
    Inspect { descriptor: PathBuf },
    /// Re-open a report and check artifact and config hashes.
    Verify {
        dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match cli.command {
        Command::Run { config, out, dry_run } => run_cmd(&config, out.as_deref(), dry_run),
        Command::Selftest { seed, directions } => selftest_cmd(seed, directions.as_deref()),
        Command::Inspect { descriptor } => inspect_cmd(&descriptor),
        Command::Verify { dir, config } => verify_cmd(&dir, config.as_deref()),
    }
}

fn run_cmd(path: &Path, out: Option<&Path>, dry_run: bool) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let parsed = config::parse(&text).and_then(|cfg| plan::build(&cfg, &text).map(|p| (cfg, p)));
    let (cfg, plan) = match parsed {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error in {} at {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let hash = report::config_hash(&text).expect("parsed above");
    let kind = cfg.kind().expect("validated");
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    if dry_run {
        println!("{}", plan.describe());
        println!("seed: {}\nconfig hash: {hash}\noutput: {}", cfg.seed, dir.display());
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let outcome = match run::execute(&plan, cfg.seed, &hash) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("runtime error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let base = report::Report {
        schema_version: cfg.schema_version,
        experiment: kind.name().to_string(),
        seed: cfg.seed,
        config_hash: hash,
        config: serde_json::from_str(&text).expect("parsed above"),
        artifacts: Vec::new(),
        summary: serde_json::Value::Null,
    };
    match report::write(&dir, base, outcome, start.elapsed().as_secs_f64()) {
        Ok(r) => {
            for a in &r.artifacts {
                println!("wrote {}", dir.join(&a.path).display());
            }
            println!("wrote {}", dir.join(report::REPORT_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: cannot write outputs to {}: {e}", dir.display());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    dim: usize,
    directions: Vec<Vec<f64>>,
}

fn selftest_cmd(seed: u64, directions: Option<&Path>) -> ExitCode {
    let tables = match directions {
        None => selftest::default_tables(),
        Some(p) => {
            let parsed = std::fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<TableFile>(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(t) => vec![selftest::Table { dim: t.dim, directions: t.directions }],
                Err(e) => {
                    eprintln!("error: cannot read direction table {}: {e}", p.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
        }
    };
    let start = Instant::now();
    let checks = selftest::run(seed, &tables);
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {failed} failed, {:.1} s", checks.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InspectFile {
    WithPoints { ruin_set: RuinSetDescriptor, points: Vec<Vec<f64>> },
    Bare(RuinSetDescriptor),
}

fn inspect_cmd(path: &Path) -> ExitCode {
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str::<InspectFile>(&t).map_err(|e| e.to_string()));
    let (desc, points) = match parsed {
        Ok(InspectFile::WithPoints { ruin_set, points }) => (ruin_set, Some(points)),
        Ok(InspectFile::Bare(d)) => (d, None),
        Err(e) => {
            eprintln!("error: cannot read descriptor {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let set = match desc.build() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let d = set.dim();
    let points = points.unwrap_or_else(|| {
        let mut pts: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|k| if j == k { 1.5 } else { 0.0 }).collect()).collect();
        pts.push(vec![0.5; d]);
        pts.push(vec![1.0; d]);
        pts
    });
    if points.iter().any(|p| p.len() != d) {
        eprintln!("error: sample points must have dimension {d}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match run::inspect_text(&set, &points) {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn verify_cmd(dir: &Path, config: Option<&Path>) -> ExitCode {
    let text = match config.map(std::fs::read_to_string).transpose() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match report::verify(dir, text.as_deref()) {
        Ok(problems) if problems.is_empty() => {
            println!("report consistent");
            ExitCode::SUCCESS
        }
        Ok(problems) => {
            for p in &problems {
                println!("MISMATCH {p}");
            }
            ExitCode::from(EXIT_FAIL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
