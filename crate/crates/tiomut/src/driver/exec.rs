//! Test execution: drive one SUT through a synthesized strategy while
//! tracking the completed spec and mutant states concretely, classifying
//! every observed delay and output against both models.

use num::rational::Ratio;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::conformance::{RuleKind, Strategy};
use crate::tioa::{
    angelic_complete, can_delay, demonic_complete, step_semantics, Move, SemState, StepOutcome,
    Tioa,
};
use crate::zones::Federation;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum TimeMode {
    Simulated,
    Real { unit_ms: u64 },
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExecutionBounds {
    /// Accumulated waiting cap per test, in time units.
    pub max_wait: Ratio<i64>,
    /// Cap on rule changes per test.
    pub step_bound: usize,
}

impl Default for ExecutionBounds {
    fn default() -> Self {
        ExecutionBounds { max_wait: Ratio::from_integer(420), step_bound: 40 }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ObservedEvent {
    Delay(Ratio<i64>),
    Output(String),
    Termination,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum TraceEvent {
    Input(String),
    Output(String),
    Delay(Ratio<i64>),
    Termination,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum InconclusiveReason {
    NoRule,
    MaxWaitExceeded,
    StepBoundExceeded,
    /// Malformed wire traffic; flagged distinctly in reports.
    ProtocolViolation(String),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    PrimaryFail,
    OtherFail,
    Inconclusive(InconclusiveReason),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CrashReport {
    pub exit_code: Option<i32>,
    pub stderr: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TestResult {
    pub test_id: String,
    pub mutant: String,
    pub verdict: Verdict,
    /// (timestamp in time units, event); timestamps are non-decreasing.
    pub trace: Vec<(Ratio<i64>, TraceEvent)>,
    pub reason: String,
    /// Present when the SUT exited with a nonzero status.
    pub crash: Option<CrashReport>,
}

/// What one delay grant produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GrantReply {
    /// `elapsed <= granted`; an output means it occurred at `elapsed`.
    Elapsed { elapsed: Ratio<i64>, output: Option<String> },
    /// Stream ended after `elapsed` time units.
    Terminated { elapsed: Ratio<i64> },
    Violation(String),
}

/// One SUT under the driver's control.
pub trait Sut {
    fn grant(&mut self, d: Ratio<i64>) -> GrantReply;
    /// Returns false when the stream is broken (termination semantics).
    fn send_input(&mut self, action: &str) -> bool;
    /// Nonzero-exit diagnostics, once the SUT has terminated.
    fn crash_report(&mut self) -> Option<CrashReport>;
}

/// Table 1: can the spec / the mutant simulate the observed event?
pub fn classify_observation(spec_can: bool, mut_can: bool) -> Option<Verdict> {
    match (spec_can, mut_can) {
        (true, true) => None, // continue
        (true, false) => Some(Verdict::Pass),
        (false, true) => Some(Verdict::PrimaryFail),
        (false, false) => Some(Verdict::OtherFail),
    }
}

/// Simulate `ev` on completed model `m`: whether it can, and the state
/// after (unchanged when it cannot). Termination is the start of
/// pure-delay behavior and always "can".
pub fn step_simulation(state: &SemState, m: &Tioa, ev: &ObservedEvent) -> (bool, SemState) {
    match ev {
        ObservedEvent::Delay(d) => {
            if can_delay(m, state, *d) {
                (true, state.delayed(*d))
            } else {
                (false, state.clone())
            }
        }
        ObservedEvent::Output(o) => match step_semantics(m, state, &Move::Action(o.clone())) {
            StepOutcome::Next(n) => (true, n),
            StepOutcome::Cannot => (false, state.clone()),
            StepOutcome::Nondeterministic(why) => {
                panic!("completed model nondeterministic: {why}")
            }
        },
        ObservedEvent::Termination => (true, state.clone()),
    }
}

/// Smallest positive delay after which the point leaves `when`'s
/// delay-connected component, at half-unit granularity; `None` when the
/// point can stay in `when` forever.
fn exit_delay(when: &Federation, point: &[Ratio<i64>]) -> Option<Ratio<i64>> {
    // Per convex piece, the admissible delay window is an interval:
    // difference bounds are delay-invariant, so only single-clock bounds
    // constrain d.
    #[derive(Clone, Copy)]
    struct Iv {
        lo: Ratio<i64>,
        lo_open: bool,
        hi: Option<Ratio<i64>>,
        hi_open: bool,
    }
    let mut ivs: Vec<Iv> = Vec::new();
    for z in when.zones() {
        let mut iv = Iv { lo: Ratio::zero(), lo_open: false, hi: None, hi_open: false };
        let mut feasible = true;
        for (i, j, b) in z.constraints() {
            let delta = match (i, j) {
                (i, 0) => point[i - 1],
                (0, j) => -point[j - 1],
                (i, j) => {
                    // Unaffected by delay: must hold already.
                    let d = point[i - 1] - point[j - 1];
                    if !b.admits(*d.numer(), *d.denom()) {
                        feasible = false;
                        break;
                    }
                    continue;
                }
            };
            // (x + d) - 0 < c  =>  d < c - x ;  0 - (x + d) < c  =>  d > -c - x
            let c = Ratio::from_integer(b.constant());
            if j == 0 {
                let cap = c - delta;
                let tighter = match iv.hi {
                    None => true,
                    Some(h) => cap < h || (cap == h && b.is_strict() && !iv.hi_open),
                };
                if tighter {
                    iv.hi = Some(cap);
                    iv.hi_open = b.is_strict();
                }
            } else {
                // delta is -x here, so d > -c - x = -c + delta.
                let floor = -c + delta;
                let tighter =
                    floor > iv.lo || (floor == iv.lo && b.is_strict() && !iv.lo_open);
                if tighter {
                    iv.lo = floor;
                    iv.lo_open = b.is_strict();
                }
            }
        }
        if !feasible {
            continue;
        }
        if let Some(h) = iv.hi {
            if h < iv.lo || (h == iv.lo && (iv.hi_open || iv.lo_open)) {
                continue;
            }
        }
        ivs.push(iv);
    }
    // Walk the interval union from d = 0 to the end of its connected
    // component. The point is in `when`, so some interval starts at 0.
    let mut end = Ratio::zero();
    let mut end_closed = true;
    loop {
        let mut grew = false;
        for iv in &ivs {
            let touches = iv.lo < end
                || (iv.lo == end && (!iv.lo_open || end_closed));
            if !touches {
                continue;
            }
            match iv.hi {
                None => return None,
                Some(h) => {
                    if h > end || (h == end && !iv.hi_open && !end_closed) {
                        end = h;
                        end_closed = !iv.hi_open;
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    // A weak end stays inside `when` at the boundary: step half past it.
    Some(if end_closed { end + Ratio::new(1, 2) } else { end })
}

struct Tracker {
    model: Tioa,
    state: SemState,
}

impl Tracker {
    fn observe(&mut self, ev: &ObservedEvent) -> bool {
        let (can, next) = step_simulation(&self.state, &self.model, ev);
        if can {
            self.state = next;
        }
        can
    }
}

/// Executes one test: the rule loop of the strategy against a live SUT.
pub fn execute_test(
    test_id: &str,
    strategy: &Strategy,
    spec: &Tioa,
    mutant: &Tioa,
    sut: &mut dyn Sut,
    bounds: &ExecutionBounds,
) -> TestResult {
    let spec_c = demonic_complete(spec);
    let mutant_c = angelic_complete(mutant);
    let mut sp = Tracker { state: SemState::initial(&spec_c), model: spec_c };
    let mut mu = Tracker { state: SemState::initial(&mutant_c), model: mutant_c };

    let mut now = Ratio::<i64>::zero();
    let mut waited = Ratio::<i64>::zero();
    let mut steps = 0usize;
    let mut last_rule: Option<usize> = None;
    let mut terminated = false;
    let mut trace: Vec<(Ratio<i64>, TraceEvent)> = Vec::new();

    let finish = |verdict: Verdict, reason: String, trace: Vec<(Ratio<i64>, TraceEvent)>, sut: &mut dyn Sut| {
        TestResult {
            test_id: test_id.to_string(),
            mutant: strategy.mutant.clone(),
            verdict,
            trace,
            reason,
            crash: sut.crash_report(),
        }
    };

    loop {
        let point: Vec<Ratio<i64>> =
            sp.state.clocks.iter().chain(mu.state.clocks.iter()).copied().collect();
        let rule_idx = strategy.rules.iter().position(|r| {
            r.spec_location == sp.model.locations[sp.state.loc].id
                && r.mutant_location == mu.model.locations[mu.state.loc].id
                && r.spec_vars == sp.state.vars
                && r.mutant_vars == mu.state.vars
                && r.when.contains(&point)
        });
        let Some(ri) = rule_idx else {
            return finish(
                Verdict::Inconclusive(InconclusiveReason::NoRule),
                format!("no strategy rule matches at t={now}"),
                trace,
                sut,
            );
        };
        if last_rule != Some(ri) {
            steps += 1;
            if steps > bounds.step_bound {
                return finish(
                    Verdict::Inconclusive(InconclusiveReason::StepBoundExceeded),
                    format!("exceeded step bound {} at t={now}", bounds.step_bound),
                    trace,
                    sut,
                );
            }
            last_rule = Some(ri);
        }
        let rule = &strategy.rules[ri];

        match &rule.kind {
            RuleKind::Input { action } => {
                if !terminated && !sut.send_input(action) {
                    terminated = true;
                    trace.push((now, TraceEvent::Termination));
                }
                trace.push((now, TraceEvent::Input(action.clone())));
                // Inputs are tester moves: both completed models are
                // input-total, so they always advance.
                step_input(&mut sp, action);
                step_input(&mut mu, action);
            }
            RuleKind::Delay | RuleKind::Await => {
                let budget = bounds.max_wait - waited;
                if budget <= Ratio::zero() {
                    return finish(
                        Verdict::Inconclusive(InconclusiveReason::MaxWaitExceeded),
                        format!("accumulated waiting reached {} time units", bounds.max_wait),
                        trace,
                        sut,
                    );
                }
                let d = match exit_delay(&rule.when, &point) {
                    Some(x) => x.min(budget),
                    None => budget,
                };
                debug_assert!(d > Ratio::zero());
                let reply = if terminated {
                    GrantReply::Elapsed { elapsed: d, output: None }
                } else {
                    sut.grant(d)
                };
                let (elapsed, output, term_now) = match reply {
                    GrantReply::Elapsed { elapsed, output } => (elapsed, output, false),
                    GrantReply::Terminated { elapsed } => (elapsed, None, true),
                    GrantReply::Violation(why) => {
                        return finish(
                            Verdict::Inconclusive(InconclusiveReason::ProtocolViolation(
                                why.clone(),
                            )),
                            format!("protocol violation: {why}"),
                            trace,
                            sut,
                        );
                    }
                };
                if elapsed > d {
                    let why = format!("SUT reported {elapsed} for a grant of {d}");
                    return finish(
                        Verdict::Inconclusive(InconclusiveReason::ProtocolViolation(why.clone())),
                        why,
                        trace,
                        sut,
                    );
                }
                waited += elapsed;
                if elapsed > Ratio::zero() {
                    let ev = ObservedEvent::Delay(elapsed);
                    let s_can = sp.observe(&ev);
                    let m_can = mu.observe(&ev);
                    now += elapsed;
                    trace.push((now, TraceEvent::Delay(elapsed)));
                    if let Some(v) = classify_observation(s_can, m_can) {
                        return finish(
                            v,
                            format!("delay of {elapsed} at t={now}"),
                            trace,
                            sut,
                        );
                    }
                }
                if let Some(o) = output {
                    let ev = ObservedEvent::Output(o.clone());
                    let s_can = sp.observe(&ev);
                    let m_can = mu.observe(&ev);
                    trace.push((now, TraceEvent::Output(o.clone())));
                    if let Some(v) = classify_observation(s_can, m_can) {
                        return finish(v, format!("output `{o}` at t={now}"), trace, sut);
                    }
                }
                if term_now {
                    terminated = true;
                    trace.push((now, TraceEvent::Termination));
                }
            }
        }
    }
}

fn step_input(t: &mut Tracker, action: &str) {
    match step_semantics(&t.model, &t.state, &Move::Action(action.to_string())) {
        StepOutcome::Next(n) => t.state = n,
        StepOutcome::Cannot => panic!(
            "completed model not total on input `{action}` at {}",
            t.model.locations[t.state.loc].id
        ),
        StepOutcome::Nondeterministic(why) => panic!("completed model nondeterministic: {why}"),
    }
}
