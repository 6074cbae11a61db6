//! `aligator`: polynomial equality invariants for multi-path numeric loops.
//!
//! Two subcommands: `analyze` runs the pipeline on one loop and prints a text
//! or JSON report; `bench` runs every `.loop` file in a directory with a
//! per-instance budget and tabulates the outcomes.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aligator_core::pipeline::{run, AnalysisReport, RunOptions, Timings};
use aligator_core::verify::VerifyOptions;
use aligator_core::{Diagnostic, DiagnosticCode};

#[derive(Parser)]
#[command(
    name = "aligator",
    version,
    about = "Polynomial equality invariants for multi-path numeric loops"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one loop: closed forms, invariant basis, optional verification
    Analyze(AnalyzeArgs),
    /// Analyze every .loop file in a directory and tabulate the results
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Loop source file, or '-' for standard input
    input: String,
    /// Report format
    #[arg(long, value_enum, default_value_t = AnalyzeFormat::Text)]
    format: AnalyzeFormat,
    /// Re-run the loop on random rational inputs and check every invariant
    #[arg(long)]
    verify: bool,
    /// Random executions to try (with --verify)
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Iterations per execution (with --verify)
    #[arg(long, default_value_t = 30)]
    steps: u64,
    /// Seed for the random executions (with --verify)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give up after this many seconds (0 = unlimited)
    #[arg(long, default_value_t = 0)]
    timeout: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory containing .loop files
    corpus: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = BenchFormat::Table)]
    format: BenchFormat,
    /// Per-instance budget in seconds (0 = unlimited)
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchFormat {
    Table,
    Json,
    Csv,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Bench(args) => bench(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<i32> {
    let source = if args.input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading standard input")?;
        buf
    } else {
        fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input))?
    };
    let opts = RunOptions {
        verify: args.verify.then(|| VerifyOptions {
            trials: args.trials,
            max_steps: args.steps,
            seed: args.seed,
        }),
    };
    let report = run_with_timeout(source, opts, budget(args.timeout));
    match args.format {
        AnalyzeFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        AnalyzeFormat::Text => print!("{}", render_text(&report)),
    }
    Ok(report.exit_code())
}

fn budget(secs: u64) -> Option<Duration> {
    (secs > 0).then(|| Duration::from_secs(secs))
}

/// Run the pipeline, abandoning it if it outlives the budget. The worker
/// thread is detached on timeout; the process exits shortly after anyway.
fn run_with_timeout(source: String, opts: RunOptions, budget: Option<Duration>) -> AnalysisReport {
    let Some(limit) = budget else {
        return run(&source, &opts);
    };
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(run(&source, &opts));
    });
    match rx.recv_timeout(limit) {
        Ok(report) => report,
        Err(_) => AnalysisReport {
            variables: Vec::new(),
            initial_variables: Vec::new(),
            paths: 0,
            closed_forms: Vec::new(),
            invariant_basis: Vec::new(),
            trivial_ideal: false,
            diagnostics: vec![Diagnostic::new(
                DiagnosticCode::Timeout,
                format!("analysis exceeded the {} s budget", limit.as_secs()),
            )],
            timings_ms: Timings::default(),
            verification: None,
        },
    }
}

fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    for d in &r.diagnostics {
        let _ = writeln!(out, "error: {d}");
    }
    if !r.variables.is_empty() {
        let _ = writeln!(out, "variables: {}", r.variables.join(", "));
        let _ = writeln!(out, "paths: {}", r.paths);
    }
    for (i, forms) in r.closed_forms.iter().enumerate() {
        let _ = writeln!(out, "closed forms, path {}:", i + 1);
        for f in forms {
            let _ = writeln!(out, "  {f}");
        }
    }
    if r.diagnostics.is_empty() {
        if r.trivial_ideal {
            let _ = writeln!(out, "invariant ideal: zero (no polynomial equality is invariant)");
        } else {
            let _ = writeln!(out, "invariant basis:");
            for g in &r.invariant_basis {
                let _ = writeln!(out, "  {g} = 0");
            }
        }
    }
    if let Some(v) = &r.verification {
        if v.passed {
            let _ = writeln!(
                out,
                "verification: {} trials x {} steps: passed",
                v.trials, v.max_steps
            );
        } else {
            let _ = writeln!(
                out,
                "verification: FAILED ({})",
                v.counterexample.as_deref().unwrap_or("no detail")
            );
        }
    }
    let t = &r.timings_ms;
    let _ = writeln!(
        out,
        "timings: parse {} ms, extract {} ms, solve {} ms, invariants {} ms",
        t.parse, t.extract, t.solve, t.invariants
    );
    out
}

#[derive(Serialize)]
struct BenchRow {
    instance: String,
    status: String,
    wall_ms: u128,
    basis_size: usize,
    nonempty: bool,
    verified: Option<bool>,
}

fn code_label(code: DiagnosticCode) -> String {
    serde_json::to_value(code)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{code:?}"))
}

fn bench(args: BenchArgs) -> Result<i32> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .with_context(|| format!("reading corpus directory {}", args.corpus.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "loop"))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    for file in &files {
        let instance = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let source = fs::read_to_string(file)
            .with_context(|| format!("reading {}", file.display()))?;
        let opts = RunOptions { verify: Some(VerifyOptions::default()) };
        let started = Instant::now();
        let report = run_with_timeout(source, opts, budget(args.timeout));
        rows.push(BenchRow {
            instance,
            status: report
                .diagnostics
                .first()
                .map_or_else(|| "ok".to_string(), |d| code_label(d.code)),
            wall_ms: started.elapsed().as_millis(),
            basis_size: report.invariant_basis.len(),
            nonempty: !report.invariant_basis.is_empty(),
            verified: report.verification.as_ref().map(|v| v.passed),
        });
    }

    match args.format {
        BenchFormat::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        BenchFormat::Csv => {
            println!("instance,status,wall_ms,basis_size,nonempty,verified");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.instance,
                    r.status,
                    r.wall_ms,
                    r.basis_size,
                    r.nonempty,
                    r.verified.map_or_else(|| "-".to_string(), |b| b.to_string())
                );
            }
        }
        BenchFormat::Table => {
            let name_w = rows.iter().map(|r| r.instance.len()).max().unwrap_or(8).max(8);
            println!(
                "{:name_w$}  {:>8}  {:>10}  {:>5}  {:>8}  status",
                "instance", "wall_ms", "basis_size", "nonempty", "verified",
                name_w = name_w
            );
            for r in &rows {
                println!(
                    "{:name_w$}  {:>8}  {:>10}  {:>5}  {:>8}  {}",
                    r.instance,
                    r.wall_ms,
                    r.basis_size,
                    r.nonempty,
                    r.verified.map_or_else(|| "-".to_string(), |b| b.to_string()),
                    r.status,
                    name_w = name_w
                );
            }
        }
    }
    Ok(0)
}
