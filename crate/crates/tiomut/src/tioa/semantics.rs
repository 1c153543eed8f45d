use num::rational::Ratio;
use num::Zero;

use super::model::{Edge, Tioa};

/// A concrete semantic state: location, variable valuation, clock
/// valuation (non-negative rationals).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SemState {
    pub loc: usize,
    pub vars: Vec<i64>,
    pub clocks: Vec<Ratio<i64>>,
}

impl SemState {
    pub fn initial(m: &Tioa) -> SemState {
        SemState {
            loc: m.initial_index(),
            vars: m.initial_vars(),
            clocks: vec![Ratio::zero(); m.clocks.len()],
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Move {
    Delay(Ratio<i64>),
    Action(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Next(SemState),
    Cannot,
    /// Two edges enabled on the same action: the model should have been
    /// rejected by the determinism check.
    Nondeterministic(String),
}

fn clock_guard_satisfied(m: &Tioa, e: &Edge, clocks: &[Ratio<i64>]) -> bool {
    e.guard.constraints().iter().all(|c| match m.clock_index(&c.operand) {
        Some(i) => c.op.eval_ratio(clocks[i - 1], c.constant),
        None => true,
    })
}

fn invariant_holds(m: &Tioa, loc: usize, clocks: &[Ratio<i64>]) -> bool {
    m.locations[loc]
        .invariant
        .constraints()
        .iter()
        .all(|c| match m.clock_index(&c.operand) {
            Some(i) => c.op.eval_ratio(clocks[i - 1], c.constant),
            None => true,
        })
}

/// The state after taking edge `e` from `s`: resets, then updates, with
/// the target-entry invariant obligation. `None` when entry is blocked.
fn take_edge(m: &Tioa, s: &SemState, e: &Edge) -> Option<SemState> {
    let mut clocks = s.clocks.clone();
    for r in &e.resets {
        let i = m.clock_index(r).expect("validated model");
        clocks[i - 1] = Ratio::zero();
    }
    let mut vars = s.vars.clone();
    for (v, k) in &e.update {
        let vi = m.var_index(v).expect("validated model");
        vars[vi] = *k;
    }
    let target = m.loc_index(&e.target).expect("validated model");
    if !invariant_holds(m, target, &clocks) {
        return None;
    }
    Some(SemState { loc: target, vars, clocks })
}

/// Edges enabled at `s` for `action`: source matches, guard satisfied on
/// clocks and variables, target invariant holds on entry.
pub fn enabled_edges<'m>(m: &'m Tioa, s: &SemState, action: &str) -> Vec<&'m Edge> {
    m.edges
        .iter()
        .filter(|e| {
            m.loc_index(&e.source) == Some(s.loc)
                && e.action == action
                && m.vars_satisfy(&e.guard, &s.vars)
                && clock_guard_satisfied(m, e, &s.clocks)
                && take_edge(m, s, e).is_some()
        })
        .collect()
}

pub fn can_delay(m: &Tioa, s: &SemState, d: Ratio<i64>) -> bool {
    // Invariants are upper-closed, so holding at the endpoint implies
    // holding along the whole delay.
    let moved: Vec<Ratio<i64>> = s.clocks.iter().map(|c| c + d).collect();
    invariant_holds(m, s.loc, &moved)
}

impl SemState {
    pub fn delayed(&self, d: Ratio<i64>) -> SemState {
        SemState {
            loc: self.loc,
            vars: self.vars.clone(),
            clocks: self.clocks.iter().map(|c| c + d).collect(),
        }
    }
}

/// One semantic step. Delay succeeds iff the invariant holds along the
/// whole delay; an action succeeds iff exactly one enabled edge exists.
pub fn step_semantics(m: &Tioa, s: &SemState, mv: &Move) -> StepOutcome {
    match mv {
        Move::Delay(d) => {
            debug_assert!(*d >= Ratio::zero());
            if can_delay(m, s, *d) {
                StepOutcome::Next(s.delayed(*d))
            } else {
                StepOutcome::Cannot
            }
        }
        Move::Action(a) => {
            let enabled = enabled_edges(m, s, a);
            match enabled.len() {
                0 => StepOutcome::Cannot,
                1 => match take_edge(m, s, enabled[0]) {
                    Some(next) => StepOutcome::Next(next),
                    None => StepOutcome::Cannot,
                },
                _ => StepOutcome::Nondeterministic(format!(
                    "{} edges enabled on `{a}` at location {}",
                    enabled.len(),
                    m.locations[s.loc].id
                )),
            }
        }
    }
}

/// Output actions enabled at `s` (used by the model-driven SUT and the
/// discrete conformance oracle).
pub fn enabled_outputs(m: &Tioa, s: &SemState) -> Vec<String> {
    let mut out = Vec::new();
    for o in &m.outputs {
        if !enabled_edges(m, s, o).is_empty() {
            out.push(o.clone());
        }
    }
    out
}
