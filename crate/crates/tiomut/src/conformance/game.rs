//! Symbolic refinement game: backward fixpoint over the product of the
//! demonically completed specification and the angelically completed
//! mutant. A mutant is non-conformant iff the initial product point can
//! reach a goal — a valuation where the mutant can emit an output the
//! spec has no edge for, or can delay past the spec invariant. All
//! delays, inputs, and matched outputs preserve clock-difference bounds,
//! so zones track the synchronization between the two clock copies
//! exactly. On non-conformance the ranked winning layers are turned into
//! a disjoint rule strategy for the test driver.

use num::rational::Ratio;
use num::Zero;
use thiserror::Error;

use super::product::{build_product, BranchKind, Product};
use super::strategy::{Rule, RuleKind, Strategy};
use crate::tioa::{angelic_complete, demonic_complete, is_deterministic, DeterminismResult, Tioa};
use crate::zones::Federation;

const SWEEP_CAP: usize = 10_000;

#[derive(Error, Debug)]
pub enum GameError {
    #[error("{side} model is nondeterministic: {witness}")]
    Nondeterministic { side: &'static str, witness: String },
    #[error("game fixpoint did not converge within {SWEEP_CAP} sweeps")]
    Diverged,
    #[error("product construction failed: {0}")]
    Product(String),
}

#[derive(Clone, Debug)]
pub enum ConformanceOutcome {
    Conforms,
    NonConformant(Strategy),
}

impl ConformanceOutcome {
    pub fn conforms(&self) -> bool {
        matches!(self, ConformanceOutcome::Conforms)
    }
}

fn require_deterministic(m: &Tioa, side: &'static str) -> Result<(), GameError> {
    match is_deterministic(m) {
        DeterminismResult::Deterministic => Ok(()),
        DeterminismResult::Counterexample(w) => Err(GameError::Nondeterministic {
            side,
            witness: format!("location {}, action {}", w.location, w.action),
        }),
    }
}

/// Goal set of a node: delay divergence plus unmatched output capability.
fn goal(p: &Product, n: usize) -> Federation {
    let node = &p.nodes[n];
    let mut g = node.divergence.clone();
    for (_, fed) in &node.unmatched {
        g = g.union(fed);
    }
    g
}

/// States from which some branch of node `n` lands inside `w` at its
/// target, restricted to branches passing `filter`.
fn action_win(
    p: &Product,
    w: &[Federation],
    n: usize,
    filter: impl Fn(BranchKind, &str) -> bool,
) -> Federation {
    let mut win = Federation::empty(p.clocks());
    for b in &p.nodes[n].branches {
        if !filter(b.kind, &b.action) {
            continue;
        }
        let pre = w[b.target].preimage_reset(&b.resets);
        win = win.union(&b.zone.intersect(&pre));
    }
    win
}

/// Monotone backward sweeps (Jacobi style: each sweep reads the previous
/// snapshot, so the result is independent of node order). Returns the
/// snapshot sequence; `snaps[i][n]` is the winning set after `i` sweeps.
fn fixpoint(p: &Product) -> Result<Vec<Vec<Federation>>, GameError> {
    let mut w: Vec<Federation> = (0..p.nodes.len()).map(|n| goal(p, n)).collect();
    let mut snaps = vec![w.clone()];
    for _ in 0..SWEEP_CAP {
        let mut changed = false;
        let next: Vec<Federation> = (0..p.nodes.len())
            .map(|n| {
                let mut t = w[n].union(&action_win(p, &w, n, |_, _| true));
                t = t.down().intersect_zone(&p.nodes[n].domain);
                if !w[n].includes(&t) {
                    changed = true;
                }
                t
            })
            .collect();
        if !changed {
            return Ok(snaps);
        }
        w = next;
        snaps.push(w.clone());
    }
    Err(GameError::Diverged)
}

fn extract_strategy(p: &Product, snaps: &[Vec<Federation>], mutant_id: &str) -> Strategy {
    let mut s = Strategy {
        mutant: mutant_id.to_string(),
        spec_clocks: p.spec.clocks.clone(),
        mutant_clocks: p.mutant.clocks.clone(),
        spec_vars: p.spec.variables.iter().map(|v| v.name.clone()).collect(),
        mutant_vars: p.mutant.variables.iter().map(|v| v.name.clone()).collect(),
        rules: Vec::new(),
    };
    for (n, node) in p.nodes.iter().enumerate() {
        let base = |kind: RuleKind, rank: usize, when: Federation| Rule {
            spec_location: p.spec.locations[node.key.s_loc].id.clone(),
            mutant_location: p.mutant.locations[node.key.m_loc].id.clone(),
            spec_vars: node.key.s_vars.clone(),
            mutant_vars: node.key.m_vars.clone(),
            kind,
            rank,
            when,
        };
        let push = |r: Rule, rules: &mut Vec<Rule>| {
            if !r.when.is_empty() {
                rules.push(r);
            }
        };

        // Rank 0: on a goal. Divergence convicts by pure delay, so it
        // wins ties against awaiting an unmatched output.
        let div = node.divergence.clone();
        push(base(RuleKind::Delay, 0, div.clone()), &mut s.rules);
        let mut unmatched = Federation::empty(p.clocks());
        for (_, fed) in &node.unmatched {
            unmatched = unmatched.union(fed);
        }
        push(base(RuleKind::Await, 0, unmatched.subtract(&div)), &mut s.rules);

        for i in 1..snaps.len() {
            let layer = snaps[i][n].subtract(&snaps[i - 1][n]);
            if layer.is_empty() {
                continue;
            }
            let mut used = Federation::empty(p.clocks());
            for input in &p.spec.inputs {
                let win = action_win(p, &snaps[i - 1], n, |k, a| {
                    k == BranchKind::Input && a == input
                });
                let cond = layer.intersect(&win).subtract(&used);
                if !cond.is_empty() {
                    used = used.union(&cond);
                    push(
                        base(RuleKind::Input { action: input.clone() }, i, cond),
                        &mut s.rules,
                    );
                }
            }
            let owin = action_win(p, &snaps[i - 1], n, |k, _| k == BranchKind::MatchedOutput);
            let cond = layer.intersect(&owin).subtract(&used);
            if !cond.is_empty() {
                used = used.union(&cond);
                push(base(RuleKind::Await, i, cond), &mut s.rules);
            }
            push(base(RuleKind::Delay, i, layer.subtract(&used)), &mut s.rules);
        }
    }
    s
}

/// Full conformance check: complete both models, build the product, run
/// the fixpoint, and synthesize a tester strategy when the mutant does
/// not refine the specification.
pub fn synthesize_strategy(
    spec: &Tioa,
    mutant: &Tioa,
    mutant_id: &str,
) -> Result<ConformanceOutcome, GameError> {
    require_deterministic(spec, "specification")?;
    require_deterministic(mutant, "mutant")?;
    let p = build_product(demonic_complete(spec), angelic_complete(mutant))
        .map_err(GameError::Product)?;
    let snaps = fixpoint(&p)?;
    let w = snaps.last().expect("at least the goal snapshot");
    let origin = vec![Ratio::<i64>::zero(); p.clocks()];
    if w[p.initial].contains(&origin) {
        Ok(ConformanceOutcome::NonConformant(extract_strategy(&p, &snaps, mutant_id)))
    } else {
        Ok(ConformanceOutcome::Conforms)
    }
}
