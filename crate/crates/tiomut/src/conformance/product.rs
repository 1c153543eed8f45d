//! Symbolic product of a demonically completed specification and an
//! angelically completed mutant, over the disjoint union of their clocks
//! (spec clocks first, mutant clocks shifted). Nodes are discrete
//! configurations; branches are joint action moves with zones already
//! restricted to the node domain (the mutant's invariant).

use std::collections::HashMap;

use crate::tioa::{ConstraintOp, Edge, Tioa};
use crate::zones::{Bound, Dbm, Federation};

/// Discrete part of a product state.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DKey {
    pub s_loc: usize,
    pub m_loc: usize,
    pub s_vars: Vec<i64>,
    pub m_vars: Vec<i64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BranchKind {
    Input,
    /// A mutant output the specification can match at these valuations.
    MatchedOutput,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub kind: BranchKind,
    pub action: String,
    /// Where the joint move is enabled (within the node domain).
    pub zone: Federation,
    /// Product clock indices reset by the move (both sides).
    pub resets: Vec<usize>,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub key: DKey,
    /// The mutant's invariant: the game lives here. Convex.
    pub domain: Dbm,
    /// Part of the domain violating the spec invariant: the mutant can
    /// let time pass where the spec cannot.
    pub divergence: Federation,
    /// Mutant output capability the spec has no edge for, per action.
    pub unmatched: Vec<(String, Federation)>,
    pub branches: Vec<Branch>,
}

pub struct Product {
    pub spec: Tioa,
    pub mutant: Tioa,
    /// Spec clock count; mutant clock i maps to product index ns + i.
    pub ns: usize,
    pub nodes: Vec<Node>,
    pub initial: usize,
}

const NODE_CAP: usize = 100_000;

impl Product {
    pub fn clocks(&self) -> usize {
        self.spec.clocks.len() + self.mutant.clocks.len()
    }
}

fn constrain(fed: Federation, i: usize, op: ConstraintOp, c: i64) -> Federation {
    match op {
        ConstraintOp::Lt => fed.constrained(i, 0, Bound::strict(c)),
        ConstraintOp::Le => fed.constrained(i, 0, Bound::weak(c)),
        ConstraintOp::Ge => fed.constrained(0, i, Bound::weak(-c)),
        ConstraintOp::Gt => fed.constrained(0, i, Bound::strict(-c)),
        ConstraintOp::Eq => fed
            .constrained(i, 0, Bound::weak(c))
            .constrained(0, i, Bound::weak(-c)),
        ConstraintOp::Ne => {
            let lt = fed.constrained(i, 0, Bound::strict(c));
            let gt = fed.constrained(0, i, Bound::strict(-c));
            lt.union(&gt)
        }
    }
}

/// `m`'s invariant at `loc` embedded into the product clock space.
fn invariant_at(m: &Tioa, loc: usize, off: usize, total: usize) -> Dbm {
    let mut z = Dbm::universe(total);
    for c in m.locations[loc].invariant.constraints() {
        if let Some(i) = m.clock_index(&c.operand) {
            let b = match c.op {
                ConstraintOp::Lt => Bound::strict(c.constant),
                _ => Bound::weak(c.constant),
            };
            z = z
                .constrained(off + i, 0, b)
                .expect("invariants with non-negative constants are satisfiable");
        }
    }
    z
}

/// Where edge `e` of `m` can fire, as a product-clock federation: clock
/// guard plus the target invariant pulled back through the resets.
/// Empty when blocked; `None` when the variable guard fails.
fn edge_zone(
    m: &Tioa,
    e: &Edge,
    vars: &[i64],
    off: usize,
    total: usize,
) -> Option<Federation> {
    if !m.vars_satisfy(&e.guard, vars) {
        return None;
    }
    let mut fed = Federation::universe(total);
    for c in e.guard.constraints() {
        if let Some(i) = m.clock_index(&c.operand) {
            fed = constrain(fed, off + i, c.op, c.constant);
        }
    }
    let target = m.loc_index(&e.target).expect("validated model");
    for c in m.locations[target].invariant.constraints() {
        if let Some(i) = m.clock_index(&c.operand) {
            if e.resets.contains(&c.operand) {
                // Pulled back through the reset: the bound applies to 0.
                if !c.op.eval_int(0, c.constant) {
                    return Some(Federation::empty(total));
                }
            } else {
                fed = constrain(fed, off + i, c.op, c.constant);
            }
        }
    }
    Some(fed)
}

fn updated_vars(m: &Tioa, e: &Edge, vars: &[i64]) -> Vec<i64> {
    let mut out = vars.to_vec();
    for (v, k) in &e.update {
        out[m.var_index(v).expect("validated model")] = *k;
    }
    out
}

fn reset_indices(m: &Tioa, e: &Edge, off: usize) -> Vec<usize> {
    e.resets
        .iter()
        .map(|r| off + m.clock_index(r).expect("validated model"))
        .collect()
}

fn edges_from<'m>(m: &'m Tioa, loc: usize, action: &str) -> Vec<&'m Edge> {
    m.edges
        .iter()
        .filter(|e| m.loc_index(&e.source) == Some(loc) && e.action == action)
        .collect()
}

/// Build the product of the (already completed) pair. Both models must
/// be deterministic and share the same alphabet split.
pub fn build_product(spec: Tioa, mutant: Tioa) -> Result<Product, String> {
    let ns = spec.clocks.len();
    let total = ns + mutant.clocks.len();

    let init_key = DKey {
        s_loc: spec.initial_index(),
        m_loc: mutant.initial_index(),
        s_vars: spec.initial_vars(),
        m_vars: mutant.initial_vars(),
    };
    let mut index: HashMap<DKey, usize> = HashMap::new();
    let mut keys: Vec<DKey> = Vec::new();
    let mut intern = |k: DKey, keys: &mut Vec<DKey>| -> usize {
        if let Some(&i) = index.get(&k) {
            return i;
        }
        let i = keys.len();
        index.insert(k.clone(), i);
        keys.push(k);
        i
    };
    intern(init_key, &mut keys);

    let mut nodes: Vec<Node> = Vec::new();
    while nodes.len() < keys.len() {
        if keys.len() > NODE_CAP {
            return Err(format!("product exceeded {NODE_CAP} discrete nodes"));
        }
        let key = keys[nodes.len()].clone();
        let domain = invariant_at(&mutant, key.m_loc, ns, total);
        let spec_inv = invariant_at(&spec, key.s_loc, 0, total);
        let divergence =
            Federation::from_zone(domain.clone()).subtract(&Federation::from_zone(spec_inv));

        let mut branches = Vec::new();
        let mut unmatched = Vec::new();

        for input in &spec.inputs {
            let s_edges = edges_from(&spec, key.s_loc, input);
            let m_edges = edges_from(&mutant, key.m_loc, input);
            for es in &s_edges {
                let Some(zs) = edge_zone(&spec, es, &key.s_vars, 0, total) else {
                    continue;
                };
                for em in &m_edges {
                    let Some(zm) = edge_zone(&mutant, em, &key.m_vars, ns, total) else {
                        continue;
                    };
                    let zone = zs.intersect(&zm).intersect_zone(&domain);
                    if zone.is_empty() {
                        continue;
                    }
                    let mut resets = reset_indices(&spec, es, 0);
                    resets.extend(reset_indices(&mutant, em, ns));
                    let tkey = DKey {
                        s_loc: spec.loc_index(&es.target).expect("validated model"),
                        m_loc: mutant.loc_index(&em.target).expect("validated model"),
                        s_vars: updated_vars(&spec, es, &key.s_vars),
                        m_vars: updated_vars(&mutant, em, &key.m_vars),
                    };
                    branches.push(Branch {
                        kind: BranchKind::Input,
                        action: input.clone(),
                        zone,
                        resets,
                        target: intern(tkey, &mut keys),
                    });
                }
            }
        }

        for output in &mutant.outputs {
            let m_edges = edges_from(&mutant, key.m_loc, output);
            let s_edges = edges_from(&spec, key.s_loc, output);
            for em in &m_edges {
                let Some(zm) = edge_zone(&mutant, em, &key.m_vars, ns, total) else {
                    continue;
                };
                let zm = zm.intersect_zone(&domain);
                if zm.is_empty() {
                    continue;
                }
                let mut uncovered = zm.clone();
                for es in &s_edges {
                    let Some(zs) = edge_zone(&spec, es, &key.s_vars, 0, total) else {
                        continue;
                    };
                    let zone = zm.intersect(&zs);
                    if zone.is_empty() {
                        continue;
                    }
                    uncovered = uncovered.subtract(&zs);
                    let mut resets = reset_indices(&spec, es, 0);
                    resets.extend(reset_indices(&mutant, em, ns));
                    let tkey = DKey {
                        s_loc: spec.loc_index(&es.target).expect("validated model"),
                        m_loc: mutant.loc_index(&em.target).expect("validated model"),
                        s_vars: updated_vars(&spec, es, &key.s_vars),
                        m_vars: updated_vars(&mutant, em, &key.m_vars),
                    };
                    branches.push(Branch {
                        kind: BranchKind::MatchedOutput,
                        action: output.clone(),
                        zone,
                        resets,
                        target: intern(tkey, &mut keys),
                    });
                }
                if !uncovered.is_empty() {
                    unmatched.push((output.clone(), uncovered));
                }
            }
        }

        nodes.push(Node { key, domain, divergence, unmatched, branches });
    }

    Ok(Product { spec, mutant, ns, nodes, initial: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::retailer;
    use crate::mutation::{generate_mutants, OperatorId};
    use crate::tioa::{angelic_complete, demonic_complete};

    fn product_of(spec: &Tioa, mutant: &Tioa) -> Product {
        build_product(demonic_complete(spec), angelic_complete(mutant)).unwrap()
    }

    /// Valuations where each mutant clock equals its spec twin; lock-step
    /// runs of identical models live here.
    fn diagonal(p: &Product) -> Federation {
        let mut fed = Federation::universe(p.clocks());
        for i in 1..=p.ns {
            fed = fed
                .constrained(i, p.ns + i, Bound::ZERO)
                .constrained(p.ns + i, i, Bound::ZERO);
        }
        fed
    }

    #[test]
    fn identity_product_is_clean_on_the_diagonal() {
        let m = retailer();
        let p = product_of(&m, &m);
        let diag = diagonal(&p);
        let n0 = &p.nodes[p.initial];
        assert_eq!(n0.key.s_loc, n0.key.m_loc);
        for n in &p.nodes {
            if n.key.s_loc == n.key.m_loc && n.key.s_vars == n.key.m_vars {
                assert!(n.divergence.intersect(&diag).is_empty());
                for (a, fed) in &n.unmatched {
                    assert!(fed.intersect(&diag).is_empty(), "unmatched {a} at {:?}", n.key);
                }
            }
        }
    }

    #[test]
    fn loosened_invariant_mutant_has_divergent_node() {
        let m = retailer();
        let minv = generate_mutants(&m, &[OperatorId::Minv]);
        let p = product_of(&m, &minv[0].model);
        // L1 invariant loosened 4 -> 5: the paired L1/L1 node diverges.
        assert!(p.nodes.iter().any(|n| {
            n.key.s_loc == n.key.m_loc && !n.divergence.is_empty()
        }));
    }

    #[test]
    fn guard_widened_mutant_has_unmatched_output() {
        let m = retailer();
        // Mgc mutants include tuna `x > 1` -> `x > 0`.
        let widened = generate_mutants(&m, &[OperatorId::Mgc])
            .into_iter()
            .find(|mu| mu.edit.contains("tuna") && mu.edit.contains("`x > 0`"))
            .expect("tuna guard lowered to 0");
        let p = product_of(&m, &widened.model);
        assert!(p
            .nodes
            .iter()
            .any(|n| n.unmatched.iter().any(|(a, _)| a == "tuna")));
    }
}
