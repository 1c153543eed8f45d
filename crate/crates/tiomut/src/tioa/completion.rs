use super::model::{
    BasicConstraint, ConstraintOp, Direction, Edge, Guard, Location, LocationKind, Tioa,
};
use crate::zones::{Bound, Dbm};

pub const UNIVERSAL_ID: &str = "UNI";

/// Demonic completion: undefined inputs lead to a fresh universal
/// location where every action and unbounded delay stay enabled.
/// Idempotent: an existing universal location is reused and empty
/// complements add no edges.
pub fn demonic_complete(m: &Tioa) -> Tioa {
    let mut out = m.clone();
    let uni = ensure_universal(&mut out);
    for li in 0..m.locations.len() {
        if matches!(out.locations[li].kind, LocationKind::Universal) {
            continue;
        }
        for input in m.inputs.clone() {
            let loc_id = out.locations[li].id.clone();
            for guard in completion_guards(&out, li, &input) {
                out.edges.push(Edge {
                    source: loc_id.clone(),
                    target: uni.clone(),
                    action: input.clone(),
                    direction: Direction::Input,
                    guard,
                    resets: Vec::new(),
                    update: Vec::new(),
                });
            }
        }
    }
    out
}

/// Angelic completion: undefined inputs become ignoring self-loops (no
/// resets, no updates).
pub fn angelic_complete(m: &Tioa) -> Tioa {
    let mut out = m.clone();
    for li in 0..m.locations.len() {
        if matches!(out.locations[li].kind, LocationKind::Universal) {
            continue;
        }
        for input in m.inputs.clone() {
            let loc_id = out.locations[li].id.clone();
            for guard in completion_guards(&out, li, &input) {
                out.edges.push(Edge {
                    source: loc_id.clone(),
                    target: loc_id.clone(),
                    action: input.clone(),
                    direction: Direction::Input,
                    guard,
                    resets: Vec::new(),
                    update: Vec::new(),
                });
            }
        }
    }
    out
}

fn ensure_universal(m: &mut Tioa) -> String {
    if let Some(l) = m
        .locations
        .iter()
        .find(|l| l.kind == LocationKind::Universal)
    {
        return l.id.clone();
    }
    let mut id = UNIVERSAL_ID.to_string();
    while m.loc_index(&id).is_some() {
        id.push('_');
    }
    m.locations.push(Location {
        id: id.clone(),
        kind: LocationKind::Universal,
        invariant: Guard::always(),
    });
    let actions: Vec<(String, Direction)> = m
        .inputs
        .iter()
        .map(|a| (a.clone(), Direction::Input))
        .chain(m.outputs.iter().map(|a| (a.clone(), Direction::Output)))
        .collect();
    for (action, direction) in actions {
        m.edges.push(Edge {
            source: id.clone(),
            target: id.clone(),
            action,
            direction,
            guard: Guard::always(),
            resets: Vec::new(),
            update: Vec::new(),
        });
    }
    id
}

/// Guards covering the part of location `li`'s invariant not covered by
/// its existing `input` edges. One guard per convex piece; pieces are
/// disjoint boxes, so each completion preserves determinism.
///
/// Edges guarded on variables are handled by enumerating variable
/// valuations; the emitted guards then carry `v = k` conjunctions.
fn completion_guards(m: &Tioa, li: usize, input: &str) -> Vec<Guard> {
    let loc_id = &m.locations[li].id;
    let edges: Vec<&Edge> = m
        .edges
        .iter()
        .filter(|e| &e.source == loc_id && e.action == input)
        .collect();
    let inv_zone = m.invariant_zone(li);
    let var_guarded = edges
        .iter()
        .any(|e| !m.guard_var_part(&e.guard).is_empty());
    if !var_guarded {
        let effective: Vec<Guard> = edges.iter().map(|e| effective_guard(m, e)).collect();
        let guards: Vec<&Guard> = effective.iter().collect();
        return complement_boxes(m, &inv_zone, &guards)
            .into_iter()
            .map(|z| box_to_guard(m, &z, &inv_zone, &[]))
            .collect();
    }
    // Per variable valuation: complement of the guards that valuation
    // satisfies, tagged with equality constraints pinning the valuation.
    let mut out = Vec::new();
    for vals in var_valuations(m) {
        let effective: Vec<Guard> = edges
            .iter()
            .filter(|e| m.vars_satisfy(&e.guard, &vals))
            .map(|e| effective_guard(m, e))
            .collect();
        let guards: Vec<&Guard> = effective.iter().collect();
        let pins: Vec<BasicConstraint> = m
            .variables
            .iter()
            .zip(&vals)
            .map(|(d, k)| BasicConstraint {
                operand: d.name.clone(),
                op: ConstraintOp::Eq,
                constant: *k,
            })
            .collect();
        for z in complement_boxes(m, &inv_zone, &guards) {
            out.push(box_to_guard(m, &z, &inv_zone, &pins));
        }
    }
    out
}

/// The region where the edge can actually fire: its guard strengthened
/// with the target invariant pulled back through the resets (reset
/// clocks enter at 0, where invariant upper bounds always hold).
fn effective_guard(m: &Tioa, e: &Edge) -> Guard {
    let ti = m.loc_index(&e.target).expect("validated");
    let mut cs = e.guard.constraints().to_vec();
    for b in m.locations[ti].invariant.constraints() {
        if m.clock_index(&b.operand).is_some() && !e.resets.contains(&b.operand) {
            cs.push(b.clone());
        }
    }
    Guard::new(cs)
}

fn var_valuations(m: &Tioa) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for v in &m.variables {
        let mut next = Vec::new();
        for prefix in &out {
            for k in v.min..=v.max {
                let mut p = prefix.clone();
                p.push(k);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Subtract the clock parts of `guards` from `inv`, peeling one defining
/// half-space at a time so every piece stays a box (and pieces are
/// pairwise disjoint).
fn complement_boxes(m: &Tioa, inv: &Dbm, guards: &[&Guard]) -> Vec<Dbm> {
    let mut pieces = vec![inv.clone()];
    for g in guards {
        let mut next = Vec::new();
        let disjuncts = guard_halfspace_dnf(m, g);
        for piece in pieces {
            let mut rest = vec![piece];
            for conj in &disjuncts {
                let mut after = Vec::new();
                for p in rest {
                    after.extend(peel(p, conj));
                }
                rest = after;
            }
            next.extend(rest);
        }
        pieces = next;
    }
    pieces
}

/// Outside-of-conjunction pieces of `piece`, cut along the defining
/// half-spaces only (keeps boxes boxes).
fn peel(piece: Dbm, conj: &[(usize, usize, Bound)]) -> Vec<Dbm> {
    let mut out = Vec::new();
    let mut rest = piece;
    for &(i, j, b) in conj {
        if let Some(p) = rest.constrained(j, i, b.negate()) {
            out.push(p);
        }
        match rest.constrained(i, j, b) {
            Some(r) => rest = r,
            None => return out,
        }
    }
    out
}

/// The clock part of a guard as a disjunction of half-space
/// conjunctions. `!=` contributes the two strict alternatives.
fn guard_halfspace_dnf(m: &Tioa, g: &Guard) -> Vec<Vec<(usize, usize, Bound)>> {
    let mut dnf: Vec<Vec<(usize, usize, Bound)>> = vec![Vec::new()];
    for c in g.constraints() {
        let i = match m.clock_index(&c.operand) {
            Some(i) => i,
            None => continue,
        };
        match c.op {
            ConstraintOp::Lt => push_all(&mut dnf, (i, 0, Bound::strict(c.constant))),
            ConstraintOp::Le => push_all(&mut dnf, (i, 0, Bound::weak(c.constant))),
            ConstraintOp::Ge => push_all(&mut dnf, (0, i, Bound::weak(-c.constant))),
            ConstraintOp::Gt => push_all(&mut dnf, (0, i, Bound::strict(-c.constant))),
            ConstraintOp::Eq => {
                push_all(&mut dnf, (i, 0, Bound::weak(c.constant)));
                push_all(&mut dnf, (0, i, Bound::weak(-c.constant)));
            }
            ConstraintOp::Ne => {
                let mut doubled = Vec::new();
                for conj in &dnf {
                    let mut lt = conj.clone();
                    lt.push((i, 0, Bound::strict(c.constant)));
                    let mut gt = conj.clone();
                    gt.push((0, i, Bound::strict(-c.constant)));
                    doubled.push(lt);
                    doubled.push(gt);
                }
                dnf = doubled;
            }
        }
    }
    dnf
}

fn push_all(dnf: &mut [Vec<(usize, usize, Bound)>], c: (usize, usize, Bound)) {
    for conj in dnf {
        conj.push(c);
    }
}

/// Read a box zone back into guard syntax, skipping bounds already
/// implied by the location invariant (so full complements come out as
/// `true`, matching the states actually reachable in the location).
fn box_to_guard(m: &Tioa, z: &Dbm, inv: &Dbm, pins: &[BasicConstraint]) -> Guard {
    let mut cs = pins.to_vec();
    for i in 1..=m.clocks.len() {
        let name = m.clocks[i - 1].clone();
        let upper = z.bound(i, 0);
        if !upper.is_inf() && upper < inv.bound(i, 0) {
            cs.push(BasicConstraint {
                operand: name.clone(),
                op: if upper.is_strict() {
                    ConstraintOp::Lt
                } else {
                    ConstraintOp::Le
                },
                constant: upper.constant(),
            });
        }
        let lower = z.bound(0, i);
        if lower < inv.bound(0, i) {
            cs.push(BasicConstraint {
                operand: name,
                op: if lower.is_strict() {
                    ConstraintOp::Gt
                } else {
                    ConstraintOp::Ge
                },
                constant: -lower.constant(),
            });
        }
    }
    Guard::new(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::retailer;

    #[test]
    fn demonic_retailer_adds_universal_and_complement_edges() {
        let m = retailer();
        let d = demonic_complete(&m);
        let uni = d
            .locations
            .iter()
            .find(|l| l.kind == LocationKind::Universal)
            .expect("universal location added");
        // Self-loops on every action.
        for a in d.inputs.iter().chain(d.outputs.iter()) {
            assert!(d
                .edges
                .iter()
                .any(|e| e.source == uni.id && e.target == uni.id && &e.action == a));
        }
        // coin from L1 guarded true (complement equals the invariant).
        let l1_coin: Vec<_> = d
            .edges
            .iter()
            .filter(|e| e.source == "L1" && e.action == "coin")
            .collect();
        assert_eq!(l1_coin.len(), 1);
        assert!(l1_coin[0].guard.is_always());
        assert_eq!(l1_coin[0].target, uni.id);
        // coin from L0 guarded x <= 4 (complement of x > 4).
        let l0_coin: Vec<_> = d
            .edges
            .iter()
            .filter(|e| e.source == "L0" && e.action == "coin" && e.target == uni.id)
            .collect();
        assert_eq!(l0_coin.len(), 1);
        assert_eq!(l0_coin[0].guard.to_string(), "x <= 4");
    }

    #[test]
    fn demonic_completion_is_idempotent() {
        let m = retailer();
        let once = demonic_complete(&m);
        let twice = demonic_complete(&once);
        assert_eq!(once.edges.len(), twice.edges.len());
        assert_eq!(once.locations.len(), twice.locations.len());
    }

    #[test]
    fn angelic_retailer_adds_self_loops() {
        let m = retailer();
        let a = angelic_complete(&m);
        let l1_coin: Vec<_> = a
            .edges
            .iter()
            .filter(|e| e.source == "L1" && e.action == "coin")
            .collect();
        assert_eq!(l1_coin.len(), 1);
        assert!(l1_coin[0].guard.is_always());
        assert_eq!(l1_coin[0].target, "L1");
        assert!(l1_coin[0].resets.is_empty() && l1_coin[0].update.is_empty());
        let twice = angelic_complete(&a);
        assert_eq!(a.edges.len(), twice.edges.len());
    }

    #[test]
    fn model_without_inputs_gets_only_the_universal_loops() {
        let mut m = retailer();
        m.inputs.clear();
        m.edges.retain(|e| e.direction == Direction::Output);
        let before = m.edges.len();
        let d = demonic_complete(&m);
        // Only the universal's output self-loops are new.
        assert_eq!(d.edges.len(), before + d.outputs.len());
    }
}
