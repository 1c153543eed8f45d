//! Syntactic mutation operators over TIOA models. Each mutant is one
//! application of one operator; generation order (and therefore ids) is
//! deterministic: operators in declaration order, then edge index, then
//! the replacement in declaration order.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use crate::tioa::{
    serialize_model, BasicConstraint, ConstraintOp, Direction, Edge, Guard, Location,
    LocationKind, Tioa,
};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorId {
    Ms,
    Mt,
    Mo,
    Minv,
    Msl,
    Mc,
    Mi,
    Mgc,
    Mgoc,
    Mgov,
    Mvu,
}

impl OperatorId {
    pub const ALL: [OperatorId; 11] = [
        OperatorId::Ms,
        OperatorId::Mt,
        OperatorId::Mo,
        OperatorId::Minv,
        OperatorId::Msl,
        OperatorId::Mc,
        OperatorId::Mi,
        OperatorId::Mgc,
        OperatorId::Mgoc,
        OperatorId::Mgov,
        OperatorId::Mvu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorId::Ms => "ms",
            OperatorId::Mt => "mt",
            OperatorId::Mo => "mo",
            OperatorId::Minv => "minv",
            OperatorId::Msl => "msl",
            OperatorId::Mc => "mc",
            OperatorId::Mi => "mi",
            OperatorId::Mgc => "mgc",
            OperatorId::Mgoc => "mgoc",
            OperatorId::Mgov => "mgov",
            OperatorId::Mvu => "mvu",
        }
    }

    pub fn from_name(name: &str) -> Option<OperatorId> {
        OperatorId::ALL.into_iter().find(|o| o.name() == name)
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Mutant {
    /// `op:index`, e.g. `mi:2`; the index counts this operator's mutants
    /// from zero in generation order.
    pub id: String,
    pub operator: OperatorId,
    /// Human-readable description naming the mutated element, old value,
    /// new value.
    pub edit: String,
    pub model: Tioa,
}

fn decorated(m: &Tioa, e: &Edge) -> String {
    let mark = match e.direction {
        Direction::Input => "?",
        Direction::Output => "!",
    };
    let _ = m;
    format!("{} -{}{}-> {}", e.source, e.action, mark, e.target)
}

/// Edges eligible for mutation: sources that are neither universal nor
/// sink locations (raw models normally contain neither).
fn eligible_edges(m: &Tioa) -> Vec<usize> {
    m.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let li = m.loc_index(&e.source).expect("validated");
            !matches!(m.locations[li].kind, LocationKind::Universal | LocationKind::Sink)
        })
        .map(|(i, _)| i)
        .collect()
}

fn with_edge(m: &Tioa, idx: usize, f: impl FnOnce(&mut Edge)) -> Tioa {
    let mut out = m.clone();
    f(&mut out.edges[idx]);
    out
}

/// Ms: replace the source location of an edge with another location.
fn gen_ms(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for l in &m.locations {
            if l.id == e.source
                || matches!(l.kind, LocationKind::Universal | LocationKind::Sink)
            {
                continue;
            }
            let mutant = with_edge(m, idx, |e| e.source = l.id.clone());
            out.push((
                format!("edge {} ({}): source {} -> {}", idx, decorated(m, e), e.source, l.id),
                mutant,
            ));
        }
    }
    out
}

/// Mt: replace the target location of an edge with another location.
fn gen_mt(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for l in &m.locations {
            if l.id == e.target
                || matches!(l.kind, LocationKind::Universal | LocationKind::Sink)
            {
                continue;
            }
            let mutant = with_edge(m, idx, |e| e.target = l.id.clone());
            out.push((
                format!("edge {} ({}): target {} -> {}", idx, decorated(m, e), e.target, l.id),
                mutant,
            ));
        }
    }
    out
}

/// Mo: replace the action of an edge with a different output.
fn gen_mo(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for o in &m.outputs {
            if *o == e.action {
                continue;
            }
            let mutant = with_edge(m, idx, |e| {
                e.action = o.clone();
                e.direction = Direction::Output;
            });
            out.push((
                format!("edge {} ({}): action -> {}!", idx, decorated(m, e), o),
                mutant,
            ));
        }
    }
    out
}

/// Minv: loosen one invariant constraint by one time unit. Never
/// tightens.
fn gen_minv(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for (li, l) in m.locations.iter().enumerate() {
        if matches!(l.kind, LocationKind::Universal | LocationKind::Sink) {
            continue;
        }
        for (ci, b) in l.invariant.constraints().iter().enumerate() {
            let mut cs = l.invariant.constraints().to_vec();
            cs[ci] = BasicConstraint { constant: b.constant + 1, ..b.clone() };
            let mut mutant = m.clone();
            mutant.locations[li].invariant = Guard::new(cs);
            out.push((
                format!(
                    "location {}: invariant constraint `{}` -> `{} {} {}`",
                    l.id,
                    b,
                    b.operand,
                    b.op.symbol(),
                    b.constant + 1
                ),
                mutant,
            ));
        }
    }
    out
}

const SINK_ID: &str = "SNK";

fn fresh_sink_id(m: &Tioa) -> String {
    let mut id = SINK_ID.to_string();
    while m.locations.iter().any(|l| l.id == id) {
        id.push('_');
    }
    id
}

/// Msl: retarget an edge to a fresh sink location that accepts but
/// ignores all inputs.
fn gen_msl(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    let sink = fresh_sink_id(m);
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        let mut mutant = m.clone();
        mutant.locations.push(Location {
            id: sink.clone(),
            kind: LocationKind::Sink,
            invariant: Guard::always(),
        });
        mutant.edges[idx].target = sink.clone();
        for i in &m.inputs {
            mutant.edges.push(Edge {
                source: sink.clone(),
                target: sink.clone(),
                action: i.clone(),
                direction: Direction::Input,
                guard: Guard::always(),
                resets: vec![],
                update: vec![],
            });
        }
        out.push((
            format!("edge {} ({}): target {} -> sink {}", idx, decorated(m, e), e.target, sink),
            mutant,
        ));
    }
    out
}

/// Mc: invert one clock reset on an edge, per (edge, clock) pair.
fn gen_mc(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for clk in &m.clocks {
            let had = e.resets.contains(clk);
            let mutant = with_edge(m, idx, |e| {
                if had {
                    e.resets.retain(|r| r != clk);
                } else {
                    e.resets.push(clk.clone());
                }
            });
            let what = if had { "removed" } else { "added" };
            out.push((
                format!("edge {} ({}): reset of {} {}", idx, decorated(m, e), clk, what),
                mutant,
            ));
        }
    }
    out
}

/// Mi: replace the action of an edge with a different input.
fn gen_mi(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for i in &m.inputs {
            if *i == e.action {
                continue;
            }
            let mutant = with_edge(m, idx, |e| {
                e.action = i.clone();
                e.direction = Direction::Input;
            });
            out.push((
                format!("edge {} ({}): action -> {}?", idx, decorated(m, e), i),
                mutant,
            ));
        }
    }
    out
}

fn with_guard_constraint(
    m: &Tioa,
    idx: usize,
    ci: usize,
    replacement: BasicConstraint,
) -> Tioa {
    with_edge(m, idx, |e| {
        let mut cs = e.guard.constraints().to_vec();
        cs[ci] = replacement;
        e.guard = Guard::new(cs);
    })
}

/// Mgc: add or subtract one from a guard constant (clock or variable;
/// out-of-range variable constants are kept — such guards are simply
/// unsatisfiable or trivial).
fn gen_mgc(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for (ci, b) in e.guard.constraints().iter().enumerate() {
            for delta in [1i64, -1] {
                let nb = BasicConstraint { constant: b.constant + delta, ..b.clone() };
                let edit = format!(
                    "edge {} ({}): guard `{}` -> `{}`",
                    idx,
                    decorated(m, e),
                    b,
                    nb
                );
                out.push((edit, with_guard_constraint(m, idx, ci, nb)));
            }
        }
    }
    out
}

/// Mgoc: change a clock-guard operator; only ≤ and > are used (the
/// others are equivalent over continuous time).
fn gen_mgoc(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for (ci, b) in e.guard.constraints().iter().enumerate() {
            if m.clock_index(&b.operand).is_none() {
                continue;
            }
            for op in [ConstraintOp::Le, ConstraintOp::Gt] {
                if op == b.op {
                    continue;
                }
                let nb = BasicConstraint { op, ..b.clone() };
                let edit = format!(
                    "edge {} ({}): guard `{}` -> `{}`",
                    idx,
                    decorated(m, e),
                    b,
                    nb
                );
                out.push((edit, with_guard_constraint(m, idx, ci, nb)));
            }
        }
    }
    out
}

/// Mgov: change a variable-guard operator to any of the five others.
fn gen_mgov(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for (ci, b) in e.guard.constraints().iter().enumerate() {
            if m.var_index(&b.operand).is_none() {
                continue;
            }
            for op in ConstraintOp::ALL {
                if op == b.op {
                    continue;
                }
                let nb = BasicConstraint { op, ..b.clone() };
                let edit = format!(
                    "edge {} ({}): guard `{}` -> `{}`",
                    idx,
                    decorated(m, e),
                    b,
                    nb
                );
                out.push((edit, with_guard_constraint(m, idx, ci, nb)));
            }
        }
    }
    out
}

/// Mvu: assign a value to a variable in an edge's update, overriding an
/// existing assignment; identical assignments are skipped.
fn gen_mvu(m: &Tioa) -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for idx in eligible_edges(m) {
        let e = &m.edges[idx];
        for v in &m.variables {
            let existing = e.update.iter().find(|(name, _)| name == &v.name).map(|(_, k)| *k);
            for k in v.min..=v.max {
                if existing == Some(k) {
                    continue;
                }
                let mutant = with_edge(m, idx, |e| {
                    match e.update.iter_mut().find(|(name, _)| name == &v.name) {
                        Some(slot) => slot.1 = k,
                        None => e.update.push((v.name.clone(), k)),
                    }
                });
                let old = match existing {
                    Some(k0) => format!("({}, {k0})", v.name),
                    None => "none".to_string(),
                };
                out.push((
                    format!(
                        "edge {} ({}): update {} -> ({}, {})",
                        idx,
                        decorated(m, e),
                        old,
                        v.name,
                        k
                    ),
                    mutant,
                ));
            }
        }
    }
    out
}

/// Every mutant licensed by the selected operators, in deterministic
/// order. Mutants syntactically identical to the source are not emitted.
pub fn generate_mutants(m: &Tioa, ops: &[OperatorId]) -> Vec<Mutant> {
    let mut out = Vec::new();
    for op in OperatorId::ALL {
        if !ops.contains(&op) {
            continue;
        }
        let raw = match op {
            OperatorId::Ms => gen_ms(m),
            OperatorId::Mt => gen_mt(m),
            OperatorId::Mo => gen_mo(m),
            OperatorId::Minv => gen_minv(m),
            OperatorId::Msl => gen_msl(m),
            OperatorId::Mc => gen_mc(m),
            OperatorId::Mi => gen_mi(m),
            OperatorId::Mgc => gen_mgc(m),
            OperatorId::Mgoc => gen_mgoc(m),
            OperatorId::Mgov => gen_mgov(m),
            OperatorId::Mvu => gen_mvu(m),
        };
        for (edit, model) in raw {
            if &model == m {
                continue;
            }
            out.push(Mutant {
                id: format!("{}:{}", op.name(), out.iter().filter(|x: &&Mutant| x.operator == op).count()),
                operator: op,
                edit,
                model,
            });
        }
    }
    out
}

/// Writes one `<id>.model` file per mutant plus an `index` file of
/// `id<TAB>edit` lines. Returns the paths written.
pub fn export_mutants(ms: &[Mutant], dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut index = String::new();
    for mt in ms {
        let path = dir.join(format!("{}.model", mt.id));
        std::fs::write(&path, serialize_model(&mt.model))?;
        index.push_str(&format!("{}\t{}\n", mt.id, mt.edit));
        written.push(path);
    }
    let index_path = dir.join("index");
    std::fs::write(&index_path, index)?;
    written.push(index_path);
    Ok(written)
}
