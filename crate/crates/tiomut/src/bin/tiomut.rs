//! CLI front end: `run` the full pipeline, `retest` stored test ids,
//! or `mutants export` without generation or execution.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::rational::Ratio;

use tiomut::harness::{
    report_parse, report_render, retest, run_plan, ReportFormat, RunReport, TestPlan,
};
use tiomut::driver::{ExecutionBounds, TimeMode};
use tiomut::mutation::{export_mutants, generate_mutants, OperatorId};
use tiomut::tioa::{is_deterministic, parse_model, DeterminismResult};

#[derive(Parser)]
#[command(name = "tiomut", about = "Model-based mutation testing for timed I/O automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutate the model, generate test strategies, and execute them.
    Run(RunArgs),
    /// Re-execute stored test ids from a prior run's artifacts.
    Retest(RetestArgs),
    /// Mutant-level operations.
    Mutants {
        #[command(subcommand)]
        command: MutantsCommand,
    },
}

#[derive(Subcommand)]
enum MutantsCommand {
    /// Write every mutant model plus an index file, nothing else.
    Export(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Specification model file.
    #[arg(long)]
    model: PathBuf,
    /// SUT command line, quoted as one argument.
    #[arg(long)]
    sut: String,
    /// Comma-separated operator names, or `all`.
    #[arg(long, default_value = "all")]
    operators: String,
    /// `simulated` or `real`.
    #[arg(long, default_value = "simulated")]
    time: String,
    /// Wall milliseconds per model time unit in real mode.
    #[arg(long, default_value = "100")]
    time_unit_ms: u64,
    /// Accumulated waiting cap per test, in time units (rational, e.g. 420 or 841/2).
    #[arg(long)]
    max_wait: Option<String>,
    /// Cap on rule changes per test.
    #[arg(long)]
    step_bound: Option<usize>,
    #[arg(long, default_value = "1")]
    generation_workers: usize,
    #[arg(long, default_value = "1")]
    sut_instances: usize,
    /// Artifacts directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RetestArgs {
    /// Artifacts directory of the prior run.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated test ids.
    #[arg(long, default_value = "")]
    ids: String,
    /// Override the stored SUT command line.
    #[arg(long)]
    sut: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "all")]
    operators: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_operators(text: &str) -> Result<Vec<OperatorId>, String> {
    if text == "all" {
        return Ok(OperatorId::ALL.to_vec());
    }
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| OperatorId::from_name(t).ok_or_else(|| format!("unknown operator `{t}`")))
        .collect()
}

fn build_plan(args: &RunArgs) -> Result<TestPlan, String> {
    let sut: Vec<String> = args.sut.split_whitespace().map(str::to_string).collect();
    if sut.is_empty() {
        return Err("--sut must name an executable".to_string());
    }
    let mut plan = TestPlan::new(args.model.clone(), sut, args.out.clone());
    plan.operators = parse_operators(&args.operators)?;
    plan.time = match args.time.as_str() {
        "simulated" => TimeMode::Simulated,
        "real" => TimeMode::Real { unit_ms: args.time_unit_ms },
        other => return Err(format!("unknown time mode `{other}`")),
    };
    let mut bounds = ExecutionBounds::default();
    if let Some(w) = &args.max_wait {
        bounds.max_wait = w
            .parse::<Ratio<i64>>()
            .map_err(|e| format!("bad --max-wait `{w}`: {e}"))?;
    }
    if let Some(s) = args.step_bound {
        bounds.step_bound = s;
    }
    plan.bounds = bounds;
    if args.generation_workers == 0 || args.sut_instances == 0 {
        return Err("worker and instance counts must be positive".to_string());
    }
    plan.generation_workers = args.generation_workers;
    plan.sut_instances = args.sut_instances;
    Ok(plan)
}

fn finish(report: &RunReport) -> ExitCode {
    let text = report_render(report, ReportFormat::Human);
    print!("{}", String::from_utf8_lossy(&text));
    ExitCode::from(report.exit_code() as u8)
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("tiomut: {msg}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => {
            let plan = match build_plan(&args) {
                Ok(p) => p,
                Err(e) => return config_error(e),
            };
            match run_plan(&plan) {
                Ok(report) => finish(&report),
                Err(e) => config_error(e),
            }
        }
        Command::Retest(args) => {
            // The stored report carries the original plan; ids (and
            // optionally the SUT command) come from the flags.
            let results = args.out.join("results.json");
            let bytes = match std::fs::read(&results) {
                Ok(b) => b,
                Err(e) => return config_error(format!("cannot read {}: {e}", results.display())),
            };
            let prior = match report_parse(&bytes) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            let mut plan = prior.plan;
            plan.out = args.out.clone();
            plan.retest_ids = Some(
                args.ids
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect(),
            );
            if let Some(sut) = &args.sut {
                plan.sut = sut.split_whitespace().map(str::to_string).collect();
            }
            match retest(&plan) {
                Ok(report) => finish(&report),
                Err(e) => config_error(e),
            }
        }
        Command::Mutants { command: MutantsCommand::Export(args) } => {
            let operators = match parse_operators(&args.operators) {
                Ok(ops) => ops,
                Err(e) => return config_error(e),
            };
            let bytes = match std::fs::read(&args.model) {
                Ok(b) => b,
                Err(e) => return config_error(format!("cannot read {}: {e}", args.model.display())),
            };
            let model = match parse_model(&bytes) {
                Ok(m) => m,
                Err(e) => return config_error(e),
            };
            if let DeterminismResult::Counterexample(w) = is_deterministic(&model) {
                return config_error(format!(
                    "model is nondeterministic at location {} on `{}`",
                    w.location, w.action
                ));
            }
            let mutants = generate_mutants(&model, &operators);
            match export_mutants(&mutants, &args.out) {
                Ok(paths) => {
                    println!("exported {} mutants to {}", mutants.len(), args.out.display());
                    let _ = paths;
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(e),
            }
        }
    }
}
