//! A model-driven SUT: interprets a deterministic TIOA over the line
//! protocol, with pluggable output timing policies. This is the
//! executable half of the end-to-end oracle.

use std::io::{self, BufRead, Write};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use num::rational::Ratio;
use num::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::driver::wire::{format_time, parse_time, DELAYED_PREFIX, DELAY_PREFIX};
use crate::tioa::{can_delay, enabled_edges, step_semantics, Move, SemState, StepOutcome, Tioa};

/// When the SUT emits an enabled output within a delay window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputPolicy {
    /// Output as soon as enabled.
    Eager,
    /// Output at the latest admissible instant: only when the enabling
    /// window closes (by guard or invariant) within the granted span.
    Lazy,
    /// Pick uniformly among admissible (instant, output) choices — and
    /// silence, where silence is admissible.
    SeededRandom(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SutMode {
    Simulated,
    Real { unit_ms: u64 },
}

struct Simulator {
    model: Tioa,
    state: SemState,
    rng: Option<ChaCha8Rng>,
    policy: OutputPolicy,
}

/// What the simulator does with one granted span.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Plan {
    /// Consume the whole span silently.
    Silent(Ratio<i64>),
    /// Delay `at`, then emit `action`.
    Emit { at: Ratio<i64>, action: String },
}

impl Simulator {
    fn new(model: Tioa, policy: OutputPolicy) -> Simulator {
        let state = SemState::initial(&model);
        let rng = match policy {
            OutputPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Simulator { model, state, rng, policy }
    }

    /// Half-unit instants within `[0, budget]` reachable by delay, each
    /// with the outputs enabled there.
    fn windows(&self, budget: Ratio<i64>) -> Vec<(Ratio<i64>, Vec<String>)> {
        let half = Ratio::new(1, 2);
        let mut out = Vec::new();
        let mut t = Ratio::zero();
        loop {
            if t > budget || !can_delay(&self.model, &self.state, t) {
                break;
            }
            let here = self.state.delayed(t);
            let enabled: Vec<String> = self
                .model
                .outputs
                .iter()
                .filter(|o| !enabled_edges(&self.model, &here, o).is_empty())
                .cloned()
                .collect();
            out.push((t, enabled));
            if t == budget {
                break;
            }
            t = (t + half).min(budget);
        }
        out
    }

    /// Decides how to spend a granted span per the output policy. Never
    /// reports more delay than the invariant admits.
    fn plan(&mut self, budget: Ratio<i64>) -> Plan {
        let windows = self.windows(budget);
        let reachable = windows.last().map(|(t, _)| *t).unwrap_or_else(Ratio::zero);
        let whole_span_ok = reachable == budget;
        let enabled: Vec<(Ratio<i64>, &String)> = windows
            .iter()
            .flat_map(|(t, acts)| acts.iter().map(move |a| (*t, a)))
            .collect();
        match self.policy {
            OutputPolicy::Eager => match enabled.first() {
                Some((t, a)) => Plan::Emit { at: *t, action: (*a).clone() },
                None => Plan::Silent(reachable),
            },
            OutputPolicy::Lazy => {
                let latest = enabled.last().map(|(t, _)| *t);
                match latest {
                    // A window is closing inside the span (or the
                    // invariant cuts the span short): emit at the last
                    // admissible instant.
                    Some(t) if t < budget || !whole_span_ok => {
                        let a = enabled.iter().find(|(u, _)| *u == t).unwrap().1.clone();
                        Plan::Emit { at: t, action: a }
                    }
                    _ => Plan::Silent(reachable),
                }
            }
            OutputPolicy::SeededRandom(_) => {
                let rng = self.rng.as_mut().expect("seeded policy has an rng");
                let silence_ok = whole_span_ok;
                let n = enabled.len() + usize::from(silence_ok);
                if n == 0 {
                    return Plan::Silent(reachable);
                }
                let pick = rng.gen_range(0..n);
                if pick == enabled.len() {
                    Plan::Silent(reachable)
                } else {
                    let (t, a) = &enabled[pick];
                    Plan::Emit { at: *t, action: (*a).clone() }
                }
            }
        }
    }

    /// `plan` with the simulated-mode framing rule applied: an emission
    /// exactly at the grant boundary is deferred to the next grant (same
    /// global instant), so a full-length delay reply is always silent.
    fn framed_plan(&mut self, budget: Ratio<i64>) -> Plan {
        match self.plan(budget) {
            Plan::Emit { at, .. } if at == budget && budget > Ratio::zero() => {
                Plan::Silent(budget)
            }
            plan => plan,
        }
    }

    fn elapse(&mut self, d: Ratio<i64>) {
        // Clamp to the invariant boundary; in real mode wall time can
        // slightly outrun a deadline the simulator was about to act on.
        let mut d = d;
        while d > Ratio::zero() && !can_delay(&self.model, &self.state, d) {
            d -= Ratio::new(1, 1_000);
        }
        if d > Ratio::zero() {
            self.state = self.state.delayed(d);
        }
    }

    /// Applies an input if enabled; disabled or unknown inputs are
    /// ignored (angelic behavior).
    fn handle_input(&mut self, line: &str) {
        if !self.model.inputs.iter().any(|i| i == line) {
            eprintln!("sut: ignoring unknown line {line:?}");
            return;
        }
        match step_semantics(&self.model, &self.state, &Move::Action(line.to_string())) {
            StepOutcome::Next(next) => self.state = next,
            StepOutcome::Cannot => {}
            StepOutcome::Nondeterministic(why) => {
                panic!("sut model is nondeterministic: {why}")
            }
        }
    }

    fn emit(&mut self, action: &str) {
        match step_semantics(&self.model, &self.state, &Move::Action(action.to_string())) {
            StepOutcome::Next(next) => self.state = next,
            other => panic!("sut cannot emit planned output {action}: {other:?}"),
        }
    }
}

/// The same simulator behind the driver's `Sut` trait, without pipes:
/// simulated-mode semantics, used by driver and harness tests.
pub struct InProcessSut(Simulator);

impl InProcessSut {
    pub fn new(model: Tioa, policy: OutputPolicy) -> InProcessSut {
        InProcessSut(Simulator::new(model, policy))
    }
}

impl crate::driver::Sut for InProcessSut {
    fn grant(&mut self, d: Ratio<i64>) -> crate::driver::GrantReply {
        match self.0.framed_plan(d) {
            Plan::Silent(t) => {
                self.0.elapse(t);
                crate::driver::GrantReply::Elapsed { elapsed: d, output: None }
            }
            Plan::Emit { at, action } => {
                self.0.elapse(at);
                self.0.emit(&action);
                crate::driver::GrantReply::Elapsed { elapsed: at, output: Some(action) }
            }
        }
    }

    fn send_input(&mut self, action: &str) -> bool {
        self.0.handle_input(action);
        true
    }

    fn crash_report(&mut self) -> Option<crate::driver::CrashReport> {
        None
    }
}

fn run_simulated(
    sim: &mut Simulator,
    input: impl BufRead,
    mut output: impl Write,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if let Some(d) = line.strip_prefix(DELAY_PREFIX) {
            let budget = match parse_time(d) {
                Some(t) => t,
                None => {
                    eprintln!("sut: malformed delay grant {line:?}");
                    continue;
                }
            };
            match sim.framed_plan(budget) {
                Plan::Silent(t) => {
                    sim.elapse(t);
                    // Always acknowledge the full grant: a reply shorter
                    // than the grant means an output line follows.
                    writeln!(output, "{DELAYED_PREFIX}{}", format_time(budget))?;
                }
                Plan::Emit { at, action } => {
                    sim.elapse(at);
                    sim.emit(&action);
                    writeln!(output, "{DELAYED_PREFIX}{}", format_time(at))?;
                    writeln!(output, "{action}")?;
                }
            }
            output.flush()?;
        } else {
            sim.handle_input(line.trim());
        }
    }
    Ok(())
}

fn run_real(sim: &mut Simulator, unit_ms: u64) -> io::Result<()> {
    let (tx, rx) = mpsc::channel::<String>();
    std::thread::spawn(move || {
        let stdin = io::stdin();
        for line in stdin.lock().lines() {
            match line {
                Ok(l) => {
                    if tx.send(l).is_err() {
                        return;
                    }
                }
                Err(_) => return,
            }
        }
    });
    let stdout = io::stdout();
    // Plan against a horizon past every constant: windows neither open
    // nor close beyond it.
    let horizon = Ratio::from_integer(sim.model.max_constant() + 2);
    let mut mark = Instant::now();
    loop {
        let plan = sim.plan(horizon);
        let wait = match &plan {
            Plan::Emit { at, .. } => {
                let ms = (*at * Ratio::from_integer(unit_ms as i64)).ceil().to_integer();
                Some(Duration::from_millis(ms.max(0) as u64))
            }
            Plan::Silent(_) => None,
        };
        let since_mark = |now: Instant, mark: Instant| {
            Ratio::new(now.duration_since(mark).as_millis() as i64, unit_ms as i64)
        };
        let received = match wait {
            Some(w) => {
                let already = mark.elapsed();
                if already >= w {
                    Err(mpsc::RecvTimeoutError::Timeout)
                } else {
                    rx.recv_timeout(w - already)
                }
            }
            None => rx.recv().map_err(|_| mpsc::RecvTimeoutError::Disconnected),
        };
        match received {
            Ok(line) => {
                let now = Instant::now();
                sim.elapse(since_mark(now, mark));
                mark = now;
                sim.handle_input(line.trim());
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                if let Plan::Emit { at, action } = plan {
                    sim.elapse(at);
                    sim.emit(&action);
                    let mut out = stdout.lock();
                    writeln!(out, "{action}")?;
                    out.flush()?;
                    mark = Instant::now();
                }
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => return Ok(()),
        }
    }
}

/// Drives `model` as a SUT over this process's standard streams until
/// end of input.
pub fn run_sut(model: Tioa, policy: OutputPolicy, mode: SutMode) -> io::Result<()> {
    let mut sim = Simulator::new(model, policy);
    match mode {
        SutMode::Simulated => {
            let stdin = io::stdin();
            let stdout = io::stdout();
            run_simulated(&mut sim, stdin.lock(), stdout.lock())
        }
        SutMode::Real { unit_ms } => run_real(&mut sim, unit_ms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::retailer;

    fn drive(model: Tioa, policy: OutputPolicy, script: &[&str]) -> Vec<String> {
        let mut sim = Simulator::new(model, policy);
        let input = script.join("\n").into_bytes();
        let mut out = Vec::new();
        run_simulated(&mut sim, &input[..], &mut out).unwrap();
        String::from_utf8(out).unwrap().lines().map(str::to_string).collect()
    }

    #[test]
    fn eager_garnish_fires_immediately_in_l1() {
        let lines = drive(
            retailer(),
            OutputPolicy::Eager,
            &["@delay 5", "coin", "@delay 5"],
        );
        // In L0 with free=0 nothing is enabled; delay is blocked by no
        // invariant, so the whole grant elapses.
        assert_eq!(lines[0], "@delayed 5");
        assert_eq!(lines[1], "@delayed 0");
        assert_eq!(lines[2], "garnish");
    }

    #[test]
    fn lazy_outputs_at_invariant_boundary() {
        let lines = drive(
            retailer(),
            OutputPolicy::Lazy,
            &["@delay 5", "coin", "@delay 5"],
        );
        assert_eq!(lines[1], "@delayed 4");
        assert_eq!(lines[2], "garnish");
    }

    #[test]
    fn lazy_grant_zero_is_silent() {
        let lines = drive(retailer(), OutputPolicy::Lazy, &["@delay 0"]);
        assert_eq!(lines, vec!["@delayed 0"]);
    }

    #[test]
    fn disabled_inputs_are_ignored() {
        // coin requires x > 4; sending it at x = 1 must be a no-op.
        let lines = drive(
            retailer(),
            OutputPolicy::Eager,
            &["@delay 1", "coin", "@delay 1"],
        );
        assert_eq!(lines, vec!["@delayed 1", "@delayed 1"]);
    }

    #[test]
    fn never_reports_more_delay_than_granted_or_admissible() {
        let lines = drive(
            retailer(),
            OutputPolicy::SeededRandom(7),
            &["@delay 6", "coin", "@delay 9", "@delay 9", "@delay 9"],
        );
        for pair in lines.iter().filter(|l| l.starts_with(DELAYED_PREFIX)) {
            let t = parse_time(pair.strip_prefix(DELAYED_PREFIX).unwrap()).unwrap();
            assert!(t <= Ratio::from_integer(9));
        }
    }
}
