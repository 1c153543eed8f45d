//! Orchestration: plan configuration, parallel strategy generation,
//! phased execution over a pool of SUT instances, reporting, retest,
//! and mutant export. Generation is worker-count independent; no SUT
//! starts before the last strategy is synthesized.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformance::{
    parse_strategy, serialize_strategy, synthesize_strategy, ConformanceOutcome, Strategy,
};
use crate::driver::{
    execute_test, ExecutionBounds, ProcessSut, TestResult, TimeMode, Verdict,
};
use crate::mutation::{export_mutants, generate_mutants, Mutant, OperatorId};
use crate::tioa::{is_deterministic, parse_model, DeterminismResult, Tioa};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TestPlan {
    pub model: PathBuf,
    /// SUT command line, first token is the executable.
    pub sut: Vec<String>,
    pub operators: Vec<OperatorId>,
    pub time: TimeMode,
    pub bounds: ExecutionBounds,
    pub generation_workers: usize,
    pub sut_instances: usize,
    pub out: PathBuf,
    pub retest_ids: Option<Vec<String>>,
}

impl TestPlan {
    pub fn new(model: PathBuf, sut: Vec<String>, out: PathBuf) -> TestPlan {
        TestPlan {
            model,
            sut,
            operators: OperatorId::ALL.to_vec(),
            time: TimeMode::Simulated,
            bounds: ExecutionBounds::default(),
            generation_workers: 1,
            sut_instances: 1,
            out,
            retest_ids: None,
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Timing {
    pub mutation_ms: u128,
    pub generation_ms: u128,
    pub execution_ms: u128,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TestEntry {
    pub result: TestResult,
    /// Crashed SUTs sit outside the verdict table.
    pub crashed: bool,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub plan: TestPlan,
    pub mutant_count: usize,
    /// Discarded as conforming, recorded for auditability: (id, edit).
    pub conforming: Vec<(String, String)>,
    /// Per-mutant engine errors: (id, message).
    pub engine_errors: Vec<(String, String)>,
    /// Ordered by test id; one test per convicted mutant.
    pub tests: Vec<TestEntry>,
    pub timing: Timing,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        let failed = self.tests.iter().any(|t| {
            !t.crashed
                && matches!(t.result.verdict, Verdict::PrimaryFail | Verdict::OtherFail)
        });
        if failed {
            return 1;
        }
        let inconclusive = self
            .tests
            .iter()
            .any(|t| t.crashed || matches!(t.result.verdict, Verdict::Inconclusive(_)));
        if inconclusive {
            2
        } else {
            0
        }
    }
}

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("model error: {0}")]
    Model(#[from] crate::tioa::ModelError),
    #[error("model is nondeterministic at location {location} on `{action}`")]
    Nondeterministic { location: String, action: String },
    #[error("unknown test id `{0}`")]
    UnknownId(String),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("artifact error: {0}")]
    Artifact(String),
}

fn load_model(path: &Path) -> Result<Tioa, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
    let model = parse_model(&bytes)?;
    match is_deterministic(&model) {
        DeterminismResult::Deterministic => Ok(model),
        DeterminismResult::Counterexample(w) => Err(HarnessError::Nondeterministic {
            location: w.location,
            action: w.action,
        }),
    }
}

/// Runs `jobs(i)` for `i < n` over a fixed-size worker pool; the result
/// vector is indexed by job, so the outcome is worker-count independent.
fn pooled<T: Send>(n: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let out = job(i);
                slots.lock().expect("pool slots")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("pool slots")
        .into_iter()
        .map(|x| x.expect("every job ran"))
        .collect()
}

enum Generated {
    Conforming,
    Error(String),
    Strategy(Box<Strategy>),
}

fn execute_one(
    plan: &TestPlan,
    spec: &Tioa,
    mutant: &Tioa,
    strategy: &Strategy,
    test_id: &str,
) -> TestEntry {
    let result = match ProcessSut::spawn(&plan.sut, plan.time) {
        Ok(mut sut) => execute_test(test_id, strategy, spec, mutant, &mut sut, &plan.bounds),
        Err(e) => TestResult {
            test_id: test_id.to_string(),
            mutant: strategy.mutant.clone(),
            verdict: Verdict::Inconclusive(crate::driver::InconclusiveReason::ProtocolViolation(
                format!("cannot launch SUT: {e}"),
            )),
            trace: Vec::new(),
            reason: format!("cannot launch SUT: {e}"),
            crash: None,
        },
    };
    let crashed = result.crash.is_some();
    TestEntry { result, crashed }
}

/// The Fig. 2 pipeline: mutate, synthesize strategies in parallel,
/// discard (but record) conforming mutants, then execute every strategy
/// against fresh SUT instances. Artifacts land under `plan.out`.
pub fn run_plan(plan: &TestPlan) -> Result<RunReport, HarnessError> {
    let spec = load_model(&plan.model)?;

    let t0 = Instant::now();
    let mutants = generate_mutants(&spec, &plan.operators);
    let mutation_ms = t0.elapsed().as_millis();

    std::fs::create_dir_all(&plan.out)
        .map_err(|e| HarnessError::Io(plan.out.clone(), e))?;
    export_mutants(&mutants, &plan.out.join("mutants"))
        .map_err(|e| HarnessError::Io(plan.out.join("mutants"), e))?;

    let t1 = Instant::now();
    let generated: Vec<Generated> = pooled(mutants.len(), plan.generation_workers, |i| {
        let mt = &mutants[i];
        match synthesize_strategy(&spec, &mt.model, &mt.id) {
            Ok(ConformanceOutcome::Conforms) => Generated::Conforming,
            Ok(ConformanceOutcome::NonConformant(s)) => Generated::Strategy(Box::new(s)),
            Err(e) => Generated::Error(e.to_string()),
        }
    });
    let generation_ms = t1.elapsed().as_millis();

    let mut conforming = Vec::new();
    let mut engine_errors = Vec::new();
    let mut work: Vec<(&Mutant, Strategy)> = Vec::new();
    let strat_dir = plan.out.join("strategies");
    std::fs::create_dir_all(&strat_dir).map_err(|e| HarnessError::Io(strat_dir.clone(), e))?;
    for (mt, g) in mutants.iter().zip(generated) {
        match g {
            Generated::Conforming => conforming.push((mt.id.clone(), mt.edit.clone())),
            Generated::Error(e) => engine_errors.push((mt.id.clone(), e)),
            Generated::Strategy(s) => {
                let path = strat_dir.join(format!("{}.json", mt.id));
                std::fs::write(&path, serialize_strategy(&s))
                    .map_err(|e| HarnessError::Io(path, e))?;
                work.push((mt, *s));
            }
        }
    }

    // Phase separation: every strategy exists before any SUT starts.
    let t2 = Instant::now();
    let mut tests = pooled(work.len(), plan.sut_instances, |i| {
        let (mt, strategy) = &work[i];
        execute_one(plan, &spec, &mt.model, strategy, &mt.id)
    });
    let execution_ms = t2.elapsed().as_millis();
    tests.sort_by(|a, b| a.result.test_id.cmp(&b.result.test_id));

    let report = RunReport {
        plan: plan.clone(),
        mutant_count: mutants.len(),
        conforming,
        engine_errors,
        tests,
        timing: Timing { mutation_ms, generation_ms, execution_ms },
    };
    let results_path = plan.out.join("results.json");
    std::fs::write(&results_path, report_render(&report, ReportFormat::Machine))
        .map_err(|e| HarnessError::Io(results_path, e))?;
    Ok(report)
}

/// Re-executes only the named test ids from a prior run's artifacts; no
/// mutation or generation is redone.
pub fn retest(plan: &TestPlan) -> Result<RunReport, HarnessError> {
    let spec = load_model(&plan.model)?;
    let ids = plan.retest_ids.clone().unwrap_or_default();
    let index_path = plan.out.join("mutants").join("index");
    let index_text = std::fs::read_to_string(&index_path)
        .map_err(|_| HarnessError::MissingArtifact(index_path.clone()))?;
    let known: BTreeMap<&str, &str> = index_text
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .collect();

    let mut work: Vec<(String, Tioa, Strategy)> = Vec::new();
    for id in &ids {
        if !known.contains_key(id.as_str()) {
            return Err(HarnessError::UnknownId(id.clone()));
        }
        let model_path = plan.out.join("mutants").join(format!("{id}.model"));
        let strat_path = plan.out.join("strategies").join(format!("{id}.json"));
        let model_bytes = std::fs::read(&model_path)
            .map_err(|_| HarnessError::MissingArtifact(model_path.clone()))?;
        let mutant = parse_model(&model_bytes)?;
        let strat_bytes = std::fs::read(&strat_path)
            .map_err(|_| HarnessError::MissingArtifact(strat_path.clone()))?;
        let strategy = parse_strategy(&strat_bytes).map_err(HarnessError::Artifact)?;
        work.push((id.clone(), mutant, strategy));
    }

    let t0 = Instant::now();
    let mut tests = pooled(work.len(), plan.sut_instances, |i| {
        let (id, mutant, strategy) = &work[i];
        execute_one(plan, &spec, mutant, strategy, id)
    });
    let execution_ms = t0.elapsed().as_millis();
    tests.sort_by(|a, b| a.result.test_id.cmp(&b.result.test_id));

    Ok(RunReport {
        plan: plan.clone(),
        mutant_count: work.len(),
        conforming: Vec::new(),
        engine_errors: Vec::new(),
        tests,
        timing: Timing { mutation_ms: 0, generation_ms: 0, execution_ms },
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    Human,
    Machine,
}

fn verdict_text(e: &TestEntry) -> String {
    if e.crashed {
        return "crashed".to_string();
    }
    match &e.result.verdict {
        Verdict::Pass => "pass".into(),
        Verdict::PrimaryFail => "primary-fail".into(),
        Verdict::OtherFail => "other-fail".into(),
        Verdict::Inconclusive(r) => format!("inconclusive({})", reason_text(r)),
    }
}

fn reason_text(r: &crate::driver::InconclusiveReason) -> &'static str {
    use crate::driver::InconclusiveReason::*;
    match r {
        NoRule => "no-rule",
        MaxWaitExceeded => "max-wait-exceeded",
        StepBoundExceeded => "step-bound-exceeded",
        ProtocolViolation(_) => "protocol-violation",
    }
}

fn trace_text(t: &[(Ratio<i64>, crate::driver::TraceEvent)]) -> String {
    use crate::driver::TraceEvent::*;
    t.iter()
        .map(|(at, ev)| match ev {
            Input(a) => format!("{at}:{a}?"),
            Output(a) => format!("{at}:{a}!"),
            Delay(d) => format!("{at}:+{d}"),
            Termination => format!("{at}:eof"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human: an aligned table of mutant description, test id, verdict,
/// reason, trace. Machine: JSON that re-parses to the in-memory report.
pub fn report_render(r: &RunReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Machine => {
            let mut out = serde_json::to_vec_pretty(r).expect("reports serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Human => {
            let header = ["mutant", "test", "verdict", "reason", "trace"];
            let rows: Vec<[String; 5]> = r
                .tests
                .iter()
                .map(|t| {
                    [
                        t.result.mutant.clone(),
                        t.result.test_id.clone(),
                        verdict_text(t),
                        t.result.reason.clone(),
                        trace_text(&t.result.trace),
                    ]
                })
                .collect();
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row.iter()) {
                    *w = (*w).max(cell.len());
                }
            }
            let fmt_row = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let mut text = String::new();
            let head: Vec<String> = header.iter().map(|h| h.to_string()).collect();
            text.push_str(&fmt_row(&head));
            text.push('\n');
            for row in &rows {
                text.push_str(&fmt_row(row));
                text.push('\n');
            }
            text.push_str(&format!(
                "\n{} mutants: {} conforming (discarded), {} engine errors, {} tests \
                 ({} crashed); mutation {} ms, generation {} ms, execution {} ms\n",
                r.mutant_count,
                r.conforming.len(),
                r.engine_errors.len(),
                r.tests.len(),
                r.tests.iter().filter(|t| t.crashed).count(),
                r.timing.mutation_ms,
                r.timing.generation_ms,
                r.timing.execution_ms,
            ));
            for (id, e) in &r.engine_errors {
                text.push_str(&format!("engine error {id}: {e}\n"));
            }
            text.into_bytes()
        }
    }
}

pub fn report_parse(bytes: &[u8]) -> Result<RunReport, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("report syntax: {e}"))
}
