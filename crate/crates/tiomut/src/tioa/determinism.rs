use std::collections::{HashMap, VecDeque};

use num::rational::Ratio;

use super::model::Tioa;
use crate::zones::{Dbm, Federation};

#[derive(Clone, Debug)]
pub struct NondetWitness {
    pub location: String,
    pub action: String,
    pub edge_a: usize,
    pub edge_b: usize,
    pub valuation: Vec<(String, Ratio<i64>)>,
}

#[derive(Clone, Debug)]
pub enum DeterminismResult {
    Deterministic,
    Counterexample(NondetWitness),
}

impl DeterminismResult {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, DeterminismResult::Deterministic)
    }
}

const STATE_CAP: usize = 100_000;

/// Checks that no reachable (location, variable valuation) admits two
/// distinct edges on the same action with jointly satisfiable guards.
/// Reachability is symbolic over (location, valuation, zone) triples.
pub fn is_deterministic(m: &Tioa) -> DeterminismResult {
    let n = m.clocks.len();
    let k = m.max_constant();
    let mut seen: HashMap<(usize, Vec<i64>), Federation> = HashMap::new();
    let mut queue: VecDeque<(usize, Vec<i64>, Dbm)> = VecDeque::new();

    let init_zone = delay_closure(m, m.initial_index(), &Dbm::zero(n)).map(|z| z.extrapolated(k));
    let start = (m.initial_index(), m.initial_vars());
    if let Some(z) = init_zone {
        seen.entry(start.clone())
            .or_insert_with(|| Federation::empty(n))
            .push(z.clone());
        queue.push_back((start.0, start.1, z));
    }

    let mut visits = 0usize;
    while let Some((loc, vars, zone)) = queue.pop_front() {
        visits += 1;
        if visits > STATE_CAP {
            // Fail loudly rather than loop: pathological models without
            // extrapolation can diverge.
            panic!("determinism check exceeded {STATE_CAP} symbolic states");
        }
        if let Some(w) = overlap_witness(m, loc, &vars, &zone) {
            return DeterminismResult::Counterexample(w);
        }
        for e in &m.edges {
            if m.loc_index(&e.source) != Some(loc) || !m.vars_satisfy(&e.guard, &vars) {
                continue;
            }
            let guard_fed = m.guard_clock_fed(&e.guard);
            let resets: Vec<usize> = e
                .resets
                .iter()
                .map(|r| m.clock_index(r).expect("validated"))
                .collect();
            let target = m.loc_index(&e.target).expect("validated");
            let mut new_vars = vars.clone();
            for (v, k) in &e.update {
                new_vars[m.var_index(v).expect("validated")] = *k;
            }
            for g in guard_fed.intersect_zone(&zone).zones() {
                let entered = g.reset(&resets);
                if let Some(z) = delay_closure(m, target, &entered) {
                    let z = z.extrapolated(k);
                    let key = (target, new_vars.clone());
                    let fed = seen
                        .entry(key)
                        .or_insert_with(|| Federation::empty(n));
                    if !fed.includes(&Federation::from_zone(z.clone())) {
                        fed.push(z.clone());
                        queue.push_back((target, new_vars.clone(), z));
                    }
                }
            }
        }
    }
    DeterminismResult::Deterministic
}

/// Intersect with the invariant, close under delay, intersect again.
fn delay_closure(m: &Tioa, loc: usize, z: &Dbm) -> Option<Dbm> {
    let inv = m.invariant_zone(loc);
    z.intersect(&inv).map(|z| {
        z.up()
            .intersect(&inv)
            .expect("delay closure keeps the zone non-empty")
    })
}

fn overlap_witness(m: &Tioa, loc: usize, vars: &[i64], zone: &Dbm) -> Option<NondetWitness> {
    let indices: Vec<usize> = m
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| m.loc_index(&e.source) == Some(loc) && m.vars_satisfy(&e.guard, vars))
        .map(|(i, _)| i)
        .collect();
    for (a_pos, &a) in indices.iter().enumerate() {
        for &b in &indices[a_pos + 1..] {
            let ea = &m.edges[a];
            let eb = &m.edges[b];
            if ea.action != eb.action {
                continue;
            }
            let fa = enabled_fed(m, ea, zone, vars);
            let fb = enabled_fed(m, eb, zone, vars);
            let overlap = fa.intersect(&fb);
            if let Some(point) = overlap.witness() {
                return Some(NondetWitness {
                    location: m.locations[loc].id.clone(),
                    action: ea.action.clone(),
                    edge_a: a,
                    edge_b: b,
                    valuation: m
                        .clocks
                        .iter()
                        .cloned()
                        .zip(point)
                        .collect(),
                });
            }
        }
    }
    None
}

/// Zone part where the edge is enabled: guard satisfied and the target
/// invariant holds after resets. The invariant is pulled back through
/// the reset: bounds on reset clocks always hold at 0, bounds on other
/// clocks apply unchanged.
fn enabled_fed(m: &Tioa, e: &super::model::Edge, zone: &Dbm, _vars: &[i64]) -> Federation {
    let target = m.loc_index(&e.target).expect("validated");
    let resets: Vec<usize> = e
        .resets
        .iter()
        .map(|r| m.clock_index(r).expect("validated"))
        .collect();
    let guard_fed = m.guard_clock_fed(&e.guard).intersect_zone(zone);
    let mut out = Federation::empty(m.clocks.len());
    for z in guard_fed.zones() {
        if let Some(back) = pullback_invariant(m, z, &resets, target) {
            out.push(back);
        }
    }
    out
}

fn pullback_invariant(m: &Tioa, z: &Dbm, resets: &[usize], target: usize) -> Option<Dbm> {
    let inv = m.invariant_zone(target);
    let mut cur = z.clone();
    for i in 1..=m.clocks.len() {
        if resets.contains(&i) {
            continue;
        }
        let b = inv.bound(i, 0);
        if !b.is_inf() {
            cur = cur.constrained(i, 0, b)?;
        }
    }
    Some(cur)
}
