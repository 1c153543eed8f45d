//! Explicit-state bounded refinement check: the brute-force oracle the
//! game solver is validated against. Works on the completed pair, with
//! delays quantized to half time units and clocks clamped just past the
//! largest constant (all guards saturate there).

use std::collections::HashMap;

use num::rational::Ratio;

use crate::tioa::{can_delay, enabled_outputs, step_semantics, Move, SemState, StepOutcome, Tioa};

const STATE_CAP: usize = 500_000;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleOutcome {
    ConformsWithinBound,
    /// Shortest violating trace; the last move is the delay or output
    /// the specification cannot simulate.
    Violation(Vec<Move>),
}

impl OracleOutcome {
    pub fn conforms(&self) -> bool {
        matches!(self, OracleOutcome::ConformsWithinBound)
    }
}

fn clamp(s: &mut SemState, ceiling: Ratio<i64>) {
    for c in &mut s.clocks {
        if *c > ceiling {
            *c = ceiling;
        }
    }
}

fn must_step(m: &Tioa, s: &SemState, mv: &Move, side: &str) -> SemState {
    match step_semantics(m, s, mv) {
        StepOutcome::Next(n) => n,
        StepOutcome::Cannot => panic!(
            "{side} model is not total on {mv:?} at location {} — completion bug",
            m.locations[s.loc].id
        ),
        StepOutcome::Nondeterministic(why) => panic!("{side} model nondeterministic: {why}"),
    }
}

/// Breadth-first check of the refinement clauses over the completed,
/// deterministic pair, up to `depth` moves. Returns the shortest
/// violating trace found within the bound.
pub fn discrete_conformance_oracle(spec: &Tioa, mutant: &Tioa, depth: usize) -> OracleOutcome {
    // Completion is idempotent, so already-completed inputs are fine.
    let spec = &crate::tioa::demonic_complete(spec);
    let mutant = &crate::tioa::angelic_complete(mutant);
    let k = spec.max_constant().max(mutant.max_constant());
    let ceiling = Ratio::from_integer(k + 1);
    let half = Ratio::new(1, 2);
    let delays: Vec<Ratio<i64>> = (1..=2 * (k + 1)).map(|i| half * Ratio::from_integer(i)).collect();

    // Nodes carry parent links for trace reconstruction.
    struct Node {
        spec: SemState,
        mutant: SemState,
        parent: usize,
        mv: Option<Move>,
        depth: usize,
    }
    let mut nodes = vec![Node {
        spec: SemState::initial(spec),
        mutant: SemState::initial(mutant),
        parent: 0,
        mv: None,
        depth: 0,
    }];
    let mut seen: HashMap<(SemState, SemState), ()> = HashMap::new();
    seen.insert((nodes[0].spec.clone(), nodes[0].mutant.clone()), ());

    let trace_to = |nodes: &Vec<Node>, mut i: usize, last: Move| {
        let mut tr = vec![last];
        while let Some(mv) = nodes[i].mv.clone() {
            tr.push(mv);
            i = nodes[i].parent;
        }
        tr.reverse();
        tr
    };

    let mut cursor = 0;
    while cursor < nodes.len() {
        if nodes.len() > STATE_CAP {
            panic!("discrete oracle exceeded {STATE_CAP} states");
        }
        let (s, t, d) = (
            nodes[cursor].spec.clone(),
            nodes[cursor].mutant.clone(),
            nodes[cursor].depth,
        );

        // Clause: every mutant output must be simulatable by the spec.
        for o in enabled_outputs(mutant, &t) {
            let mv = Move::Action(o.clone());
            match step_semantics(spec, &s, &mv) {
                StepOutcome::Next(sn) => {
                    if d < depth {
                        let mut sn = sn;
                        let mut tn = must_step(mutant, &t, &mv, "mutant");
                        clamp(&mut sn, ceiling);
                        clamp(&mut tn, ceiling);
                        if seen.insert((sn.clone(), tn.clone()), ()).is_none() {
                            nodes.push(Node {
                                spec: sn,
                                mutant: tn,
                                parent: cursor,
                                mv: Some(mv),
                                depth: d + 1,
                            });
                        }
                    }
                }
                StepOutcome::Cannot => {
                    return OracleOutcome::Violation(trace_to(&nodes, cursor, mv));
                }
                StepOutcome::Nondeterministic(why) => panic!("spec nondeterministic: {why}"),
            }
        }

        // Clause: every mutant delay must be simulatable by the spec.
        for &dl in &delays {
            if !can_delay(mutant, &t, dl) {
                continue;
            }
            if !can_delay(spec, &s, dl) {
                return OracleOutcome::Violation(trace_to(&nodes, cursor, Move::Delay(dl)));
            }
            if d < depth {
                let mut sn = s.delayed(dl);
                let mut tn = t.delayed(dl);
                clamp(&mut sn, ceiling);
                clamp(&mut tn, ceiling);
                if seen.insert((sn.clone(), tn.clone()), ()).is_none() {
                    nodes.push(Node {
                        spec: sn,
                        mutant: tn,
                        parent: cursor,
                        mv: Some(Move::Delay(dl)),
                        depth: d + 1,
                    });
                }
            }
        }

        // Inputs: both sides are total after completion, so inputs can
        // never violate refinement; they only steer.
        if d < depth {
            for i in &spec.inputs {
                let mv = Move::Action(i.clone());
                let mut sn = must_step(spec, &s, &mv, "spec");
                let mut tn = must_step(mutant, &t, &mv, "mutant");
                clamp(&mut sn, ceiling);
                clamp(&mut tn, ceiling);
                if seen.insert((sn.clone(), tn.clone()), ()).is_none() {
                    nodes.push(Node {
                        spec: sn,
                        mutant: tn,
                        parent: cursor,
                        mv: Some(mv),
                        depth: d + 1,
                    });
                }
            }
        }
        cursor += 1;
    }
    OracleOutcome::ConformsWithinBound
}
