use crate::tioa::{
    BasicConstraint, ConstraintOp, Direction, Edge, Guard, Location, LocationKind, Tioa,
    VarDecl,
};

use super::sut::OutputPolicy;

fn c(operand: &str, op: ConstraintOp, constant: i64) -> BasicConstraint {
    BasicConstraint {
        operand: operand.into(),
        op,
        constant,
    }
}

fn guard(cs: Vec<BasicConstraint>) -> Guard {
    Guard::new(cs)
}

#[allow(clippy::too_many_arguments)]
fn edge(
    source: &str,
    target: &str,
    action: &str,
    direction: Direction,
    g: Guard,
    resets: &[&str],
    update: &[(&str, i64)],
) -> Edge {
    Edge {
        source: source.into(),
        target: target.into(),
        action: action.into(),
        direction,
        guard: g,
        resets: resets.iter().map(|s| s.to_string()).collect(),
        update: update.iter().map(|(v, k)| (v.to_string(), *k)).collect(),
    }
}

fn loc(id: &str, kind: LocationKind, invariant: Guard) -> Location {
    Location {
        id: id.into(),
        kind,
        invariant,
    }
}

use ConstraintOp::{Ge, Gt, Le, Lt};
use Direction::{Input, Output};

/// The fish-retailer model: two locations, one clock, one bounded
/// variable, one input and two outputs.
pub fn retailer() -> Tioa {
    Tioa {
        name: "Retailer".into(),
        clocks: vec!["x".into()],
        variables: vec![VarDecl {
            name: "free".into(),
            min: 0,
            max: 1,
            init: 0,
        }],
        inputs: vec!["coin".into()],
        outputs: vec!["garnish".into(), "tuna".into()],
        locations: vec![
            loc("L0", LocationKind::Initial, Guard::always()),
            loc("L1", LocationKind::Normal, guard(vec![c("x", Le, 4)])),
        ],
        initial: "L0".into(),
        edges: vec![
            edge(
                "L0",
                "L0",
                "garnish",
                Output,
                guard(vec![c("x", Lt, 3), c("free", ConstraintOp::Eq, 1)]),
                &[],
                &[("free", 0)],
            ),
            edge(
                "L0",
                "L1",
                "coin",
                Input,
                guard(vec![c("x", Gt, 4)]),
                &["x"],
                &[("free", 1)],
            ),
            edge("L1", "L0", "garnish", Output, Guard::always(), &[], &[]),
            edge(
                "L1",
                "L0",
                "tuna",
                Output,
                guard(vec![c("x", Gt, 1)]),
                &[],
                &[],
            ),
        ],
    }
}

/// A car alarm: lock arms the car after a couple of time units; opening a
/// door while armed triggers the alarm, which self-disarms after a
/// duration (recorded in the `shutdown` variable) unless unlocked first.
/// Authored fixture; its timing constants are deliberately wide so
/// real-time runs are robust.
pub fn car_alarm() -> Tioa {
    Tioa {
        name: "CarAlarm".into(),
        clocks: vec!["x".into()],
        variables: vec![VarDecl {
            name: "shutdown".into(),
            min: 0,
            max: 1,
            init: 0,
        }],
        inputs: vec!["lock".into(), "unlock".into(), "open".into()],
        outputs: vec!["armed".into(), "alarm".into(), "silent".into()],
        locations: vec![
            loc("Idle", LocationKind::Initial, Guard::always()),
            loc("Locked", LocationKind::Normal, guard(vec![c("x", Le, 3)])),
            loc("Armed", LocationKind::Normal, Guard::always()),
            loc("Triggered", LocationKind::Normal, guard(vec![c("x", Le, 1)])),
            loc("Sounding", LocationKind::Normal, guard(vec![c("x", Le, 5)])),
        ],
        initial: "Idle".into(),
        edges: vec![
            edge("Idle", "Locked", "lock", Input, Guard::always(), &["x"], &[]),
            edge("Idle", "Idle", "open", Input, Guard::always(), &[], &[]),
            edge(
                "Idle",
                "Idle",
                "alarm",
                Output,
                guard(vec![c("shutdown", ConstraintOp::Eq, 1), c("x", Le, 1)]),
                &[],
                &[("shutdown", 0)],
            ),
            edge("Locked", "Idle", "unlock", Input, Guard::always(), &[], &[]),
            edge(
                "Locked",
                "Armed",
                "armed",
                Output,
                guard(vec![c("x", Ge, 2)]),
                &["x"],
                &[],
            ),
            edge(
                "Armed",
                "Triggered",
                "open",
                Input,
                Guard::always(),
                &["x"],
                &[("shutdown", 0)],
            ),
            edge("Armed", "Idle", "unlock", Input, Guard::always(), &[], &[]),
            edge(
                "Triggered",
                "Sounding",
                "alarm",
                Output,
                Guard::always(),
                &["x"],
                &[],
            ),
            edge(
                "Sounding",
                "Idle",
                "unlock",
                Input,
                Guard::always(),
                &[],
                &[("shutdown", 0)],
            ),
            edge(
                "Sounding",
                "Idle",
                "silent",
                Output,
                guard(vec![c("x", Ge, 4)]),
                &["x"],
                &[("shutdown", 1)],
            ),
        ],
    }
}

/// A timing fixture with a mandatory wait of at least 5 time units per
/// round, used for the simulated-versus-real-time comparison.
pub fn pacer() -> Tioa {
    Tioa {
        name: "Pacer".into(),
        clocks: vec!["x".into()],
        variables: vec![],
        inputs: vec!["ping".into()],
        outputs: vec!["pong".into()],
        locations: vec![
            loc("Rest", LocationKind::Initial, Guard::always()),
            loc("Wait", LocationKind::Normal, guard(vec![c("x", Le, 6)])),
        ],
        initial: "Rest".into(),
        edges: vec![
            edge("Rest", "Wait", "ping", Input, Guard::always(), &["x"], &[]),
            edge(
                "Wait",
                "Rest",
                "pong",
                Output,
                guard(vec![c("x", Ge, 5)]),
                &["x"],
                &[],
            ),
        ],
    }
}

/// A behavioral fault seeded into the reference car-alarm SUT: one model
/// edit plus the output policy under which the fault manifests.
#[derive(Clone, Debug)]
pub struct FaultSeed {
    pub id: String,
    pub description: String,
    pub model: Tioa,
    pub policy: OutputPolicy,
}

fn seed(id: &str, description: &str, policy: OutputPolicy, edit: impl FnOnce(&mut Tioa)) -> FaultSeed {
    let mut model = car_alarm();
    edit(&mut model);
    model.name = format!("CarAlarm[{id}]");
    FaultSeed {
        id: id.into(),
        description: description.into(),
        model,
        policy,
    }
}

fn edge_mut<'m>(m: &'m mut Tioa, source: &str, action: &str) -> &'m mut Edge {
    m.edges
        .iter_mut()
        .find(|e| e.source == source && e.action == action)
        .expect("fixture edge exists")
}

/// The fault-seeded car-alarm SUT variants. Each differs from the
/// reference in exactly one behavior.
pub fn car_alarm_variants() -> Vec<FaultSeed> {
    vec![
        seed(
            "arm-early",
            "armed emitted immediately instead of after 2 time units",
            OutputPolicy::Eager,
            |m| edge_mut(m, "Locked", "armed").guard = Guard::always(),
        ),
        seed(
            "arm-never",
            "Locked deadline dropped; car may never arm",
            OutputPolicy::Lazy,
            |m| {
                let li = m.loc_index("Locked").unwrap();
                m.locations[li].invariant = Guard::always();
            },
        ),
        seed(
            "wrong-output",
            "triggered alarm replaced by silent",
            OutputPolicy::Eager,
            |m| {
                let e = edge_mut(m, "Triggered", "alarm");
                e.action = "silent".into();
            },
        ),
        seed(
            "skip-triggered",
            "open jumps straight to Sounding, skipping the alarm",
            OutputPolicy::Eager,
            |m| edge_mut(m, "Armed", "open").target = "Sounding".into(),
        ),
        seed(
            "silent-early",
            "self-disarm fires at 2 time units instead of 4",
            OutputPolicy::Eager,
            |m| {
                edge_mut(m, "Sounding", "silent").guard = guard(vec![c("x", Ge, 2)]);
            },
        ),
        seed(
            "silent-late",
            "Sounding deadline extended by 1 time unit",
            OutputPolicy::Lazy,
            |m| {
                let li = m.loc_index("Sounding").unwrap();
                m.locations[li].invariant = guard(vec![c("x", Le, 6)]);
            },
        ),
        seed(
            "spurious-beep",
            "post-shutdown beep enabled without a shutdown",
            OutputPolicy::Eager,
            |m| {
                edge_mut(m, "Idle", "alarm").guard =
                    guard(vec![c("shutdown", ConstraintOp::Eq, 0), c("x", Le, 1)]);
            },
        ),
        seed(
            "double-beep",
            "post-shutdown beep forgets to clear the shutdown flag",
            OutputPolicy::Eager,
            |m| edge_mut(m, "Idle", "alarm").update.clear(),
        ),
        seed(
            "ignore-lock",
            "lock input ignored; the car never locks",
            OutputPolicy::Lazy,
            |m| {
                m.edges
                    .retain(|e| !(e.source == "Idle" && e.action == "lock"));
            },
        ),
        seed(
            "stuck-triggered",
            "alarm loops in Triggered instead of moving to Sounding",
            OutputPolicy::Eager,
            |m| edge_mut(m, "Triggered", "alarm").target = "Triggered".into(),
        ),
    ]
}

/// A small spec/implementation pair with a hand-checked conformance
/// label, cross-validated by both the game solver and the discrete
/// oracle.
#[derive(Clone, Debug)]
pub struct LabeledPair {
    pub name: String,
    pub spec: Tioa,
    pub implementation: Tioa,
    pub conforms: bool,
}

fn pair(name: &str, spec: Tioa, implementation: Tioa, conforms: bool) -> LabeledPair {
    LabeledPair {
        name: name.into(),
        spec,
        implementation,
        conforms,
    }
}

/// One-clock base model for the labeled-pair family: one input, two
/// outputs, a bounded work window.
fn gate() -> Tioa {
    Tioa {
        name: "Gate".into(),
        clocks: vec!["x".into()],
        variables: vec![],
        inputs: vec!["go".into()],
        outputs: vec!["ok".into(), "err".into()],
        locations: vec![
            loc("S0", LocationKind::Initial, Guard::always()),
            loc("S1", LocationKind::Normal, guard(vec![c("x", Le, 3)])),
        ],
        initial: "S0".into(),
        edges: vec![
            edge("S0", "S1", "go", Input, guard(vec![c("x", Le, 2)]), &["x"], &[]),
            edge("S1", "S0", "ok", Output, guard(vec![c("x", Ge, 1)]), &[], &[]),
        ],
    }
}

/// Two-clock base model: `x` tracks the request, `y` a global cycle.
fn relay() -> Tioa {
    Tioa {
        name: "Relay".into(),
        clocks: vec!["x".into(), "y".into()],
        variables: vec![],
        inputs: vec!["req".into()],
        outputs: vec!["ack".into()],
        locations: vec![
            loc("P0", LocationKind::Initial, Guard::always()),
            loc("P1", LocationKind::Normal, guard(vec![c("y", Le, 5)])),
        ],
        initial: "P0".into(),
        edges: vec![
            edge(
                "P0",
                "P1",
                "req",
                Input,
                guard(vec![c("y", Le, 2)]),
                &["x"],
                &[],
            ),
            edge(
                "P1",
                "P0",
                "ack",
                Output,
                guard(vec![c("x", Ge, 1), c("y", Le, 4)]),
                &["y"],
                &[],
            ),
        ],
    }
}

/// Variable-carrying base model: a counter gates the second output.
fn tally() -> Tioa {
    Tioa {
        name: "Tally".into(),
        clocks: vec!["x".into()],
        variables: vec![VarDecl {
            name: "n".into(),
            min: 0,
            max: 2,
            init: 0,
        }],
        inputs: vec!["inc".into(), "skip".into()],
        outputs: vec!["hit".into()],
        locations: vec![
            loc("T0", LocationKind::Initial, Guard::always()),
            loc("T1", LocationKind::Normal, guard(vec![c("x", Le, 2)])),
        ],
        initial: "T0".into(),
        edges: vec![
            edge("T0", "T1", "inc", Input, Guard::always(), &["x"], &[("n", 1)]),
            edge("T0", "T1", "skip", Input, Guard::always(), &["x"], &[]),
            edge(
                "T1",
                "T0",
                "hit",
                Output,
                guard(vec![c("n", ConstraintOp::Eq, 1), c("x", Ge, 1)]),
                &[],
                &[("n", 2)],
            ),
        ],
    }
}

/// Hand-labeled conformance pairs spanning invariant loosening, guard
/// widening/narrowing on inputs and outputs, reset faults, retargeting,
/// added/removed outputs, and variable-update edits. Constants stay at
/// or below 5 and models use one or two clocks so the discrete oracle is
/// exact at depth 10.
pub fn labeled_pairs() -> Vec<LabeledPair> {
    let mut pairs = Vec::new();

    pairs.push(pair("gate-identity", gate(), gate(), true));

    let mut m = gate();
    m.locations[1].invariant = guard(vec![c("x", Le, 4)]);
    pairs.push(pair("gate-inv-loosened", gate(), m, false));

    let mut m = gate();
    edge_mut(&mut m, "S1", "ok").guard = guard(vec![c("x", Ge, 0)]);
    pairs.push(pair("gate-ok-early", gate(), m, false));

    let mut m = gate();
    edge_mut(&mut m, "S1", "ok").guard = guard(vec![c("x", Ge, 2)]);
    pairs.push(pair("gate-ok-narrowed", gate(), m, true));

    let mut m = gate();
    m.edges.retain(|e| e.action != "ok");
    pairs.push(pair("gate-ok-removed", gate(), m, true));

    let mut m = gate();
    edge_mut(&mut m, "S1", "ok").target = "S1".into();
    pairs.push(pair("gate-ok-selfloop", gate(), m, false));

    let mut m = gate();
    edge_mut(&mut m, "S0", "go").resets.clear();
    pairs.push(pair("gate-reset-dropped", gate(), m, false));

    let mut m = gate();
    m.edges.push(edge(
        "S1",
        "S0",
        "err",
        Output,
        guard(vec![c("x", Ge, 2)]),
        &[],
        &[],
    ));
    pairs.push(pair("gate-extra-err", gate(), m, false));

    let mut s = gate();
    s.edges.push(edge(
        "S1",
        "S0",
        "err",
        Output,
        guard(vec![c("x", Ge, 2)]),
        &[],
        &[],
    ));
    pairs.push(pair("gate-err-removed", s, gate(), true));

    // Input narrowed: go ignored on (1, 2]; the implementation then
    // outlives the spec's work deadline in S0.
    let mut m = gate();
    edge_mut(&mut m, "S0", "go").guard = guard(vec![c("x", Le, 1)]);
    pairs.push(pair("gate-input-narrowed", gate(), m, false));

    // Input widened: extra accepted inputs land in the spec's universal
    // location, which everything refines.
    let mut m = gate();
    edge_mut(&mut m, "S0", "go").guard = guard(vec![c("x", Le, 3)]);
    pairs.push(pair("gate-input-widened", gate(), m, true));

    let mut m = gate();
    edge_mut(&mut m, "S1", "ok").guard = guard(vec![c("x", Gt, 1)]);
    pairs.push(pair("gate-ok-strictened", gate(), m, true));

    let mut m = gate();
    m.locations[1].invariant = guard(vec![c("x", Lt, 3)]);
    pairs.push(pair("gate-inv-strictened", gate(), m, true));

    pairs.push(pair("relay-identity", relay(), relay(), true));

    let mut m = relay();
    edge_mut(&mut m, "P0", "req").resets = vec!["y".into()];
    pairs.push(pair("relay-wrong-reset", relay(), m, false));

    let mut m = relay();
    edge_mut(&mut m, "P1", "ack").guard = guard(vec![c("x", Ge, 1), c("y", Le, 5)]);
    pairs.push(pair("relay-ack-window-widened", relay(), m, false));

    let mut m = relay();
    edge_mut(&mut m, "P1", "ack").guard = guard(vec![c("x", Ge, 2), c("y", Le, 4)]);
    pairs.push(pair("relay-ack-delayed", relay(), m, true));

    let mut m = relay();
    edge_mut(&mut m, "P1", "ack").resets.clear();
    pairs.push(pair("relay-ack-reset-dropped", relay(), m, false));

    pairs.push(pair("tally-identity", tally(), tally(), true));

    // Update removed: n stays 0 after inc, so hit never fires — fewer
    // outputs, still a refinement.
    let mut m = tally();
    edge_mut(&mut m, "T0", "inc").update.clear();
    pairs.push(pair("tally-update-removed", tally(), m, true));

    // Wrong gate: n != 2 also admits n = 0, so hit fires after a bare
    // skip where the spec forbids it.
    let mut m = tally();
    edge_mut(&mut m, "T1", "hit").guard =
        guard(vec![c("n", ConstraintOp::Ne, 2), c("x", Ge, 1)]);
    pairs.push(pair("tally-gate-widened", tally(), m, false));

    // Retailer figure pairs: the variable-update mutant that only
    // removes garnish behavior conforms; the loosened invariant does
    // not.
    pairs.push(pair("retailer-identity", retailer(), retailer(), true));

    let mut m = retailer();
    edge_mut(&mut m, "L0", "coin").update = vec![("free".into(), 0)];
    pairs.push(pair("retailer-free-zero", retailer(), m, true));

    let mut m = retailer();
    m.locations[1].invariant = guard(vec![c("x", Le, 5)]);
    pairs.push(pair("retailer-inv-loosened", retailer(), m, false));

    let mut m = retailer();
    edge_mut(&mut m, "L1", "tuna").guard = guard(vec![c("x", Gt, 0)]);
    pairs.push(pair("retailer-tuna-early", retailer(), m, false));

    pairs
}
