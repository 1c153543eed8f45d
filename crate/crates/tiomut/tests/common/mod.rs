//! Checkers shared between the property and acceptance suites.

use num::rational::Ratio;

use tiomut::conformance::Rule;
use tiomut::tioa::{LocationKind, Tioa};
use tiomut::zones::{Bound, Dbm, Federation};
use tiomut::mutation::Mutant;

// -- Zone algebra vs grid oracle ---------------------------------------
//
// Two clocks, integer constants in [-4, 4]. A quarter-step grid over
// [0, 10] hits a representative of every clock region: fractional parts
// 0 < 1/4 < 1/2 in every ordering, values past every constant, and —
// with both clocks past 4 — every difference region up to ±4 (e.g.
// x = 8.5, y = 4.25 for x − y > 4). Pointwise agreement on the grid is
// therefore equivalence for these zones. Existentially quantified
// delays/values use eighth steps: feasible intervals have quarter
// endpoints, so any nonempty one contains an eighth point.

pub type Cs = Vec<(usize, usize, Bound)>;

pub fn build_fed(css: &[Cs]) -> Federation {
    let mut f = Federation::empty(2);
    for cs in css {
        let mut z = Some(Dbm::universe(2));
        for (i, j, b) in cs {
            z = z.and_then(|z| z.constrained(*i, *j, *b));
        }
        if let Some(z) = z {
            f.push(z);
        }
    }
    f
}

/// Membership straight off the constraint lists, no DBM machinery.
pub fn raw_contains(css: &[Cs], p: &[Ratio<i64>; 2]) -> bool {
    let val = |i: usize| if i == 0 { Ratio::from_integer(0) } else { p[i - 1] };
    css.iter().any(|cs| {
        cs.iter().all(|(i, j, b)| {
            let d = val(*i) - val(*j);
            b.admits(*d.numer(), *d.denom())
        })
    })
}

pub fn quarter_grid() -> Vec<Ratio<i64>> {
    (0..=40).map(|q| Ratio::new(q, 4)).collect()
}

pub fn eighth_grid() -> Vec<Ratio<i64>> {
    // Up to 15: a freed clock may need to exceed every constant (≤ 4)
    // relative to a grid coordinate (≤ 10).
    (0..=120).map(|q| Ratio::new(q, 8)).collect()
}

/// Compares union/intersect/subtract/up/down/reset/includes against the
/// grid oracle; returns a description of the first mismatch.
pub fn check_zone_algebra(a: &[Cs], b: &[Cs]) -> Result<(), String> {
    let fa = build_fed(a);
    let fb = build_fed(b);
    let grid = quarter_grid();
    let steps = eighth_grid();
    let union = fa.union(&fb);
    let inter = fa.intersect(&fb);
    let minus = fa.subtract(&fb);
    let up = fa.up();
    let down = fa.down();
    let reset = fa.reset(&[1]);
    let mut grid_sub = true;
    let expect = |got: bool, want: bool, op: &str, p: &[Ratio<i64>; 2]| {
        if got == want {
            Ok(())
        } else {
            Err(format!("{op} at {p:?}: got {got}, oracle {want}"))
        }
    };
    for &x in &grid {
        for &y in &grid {
            let p = [x, y];
            let ina = raw_contains(a, &p);
            let inb = raw_contains(b, &p);
            expect(fa.contains(&p), ina, "contains", &p)?;
            expect(union.contains(&p), ina || inb, "union", &p)?;
            expect(inter.contains(&p), ina && inb, "intersect", &p)?;
            expect(minus.contains(&p), ina && !inb, "subtract", &p)?;
            let past =
                steps.iter().any(|&d| d <= x && d <= y && raw_contains(a, &[x - d, y - d]));
            expect(up.contains(&p), past, "up", &p)?;
            let future = steps.iter().any(|&d| raw_contains(a, &[x + d, y + d]));
            expect(down.contains(&p), future, "down", &p)?;
            let anywhere = steps.iter().any(|&v| raw_contains(a, &[v, y]));
            expect(reset.contains(&p), x == Ratio::from_integer(0) && anywhere, "reset", &p)?;
            grid_sub &= !ina || inb;
        }
    }
    if fb.includes(&fa) != grid_sub {
        return Err(format!("includes: got {}, oracle {grid_sub}", fb.includes(&fa)));
    }
    Ok(())
}

// -- Completion input-enabledness ---------------------------------------

pub fn var_valuations(m: &Tioa) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for v in &m.variables {
        out = out
            .into_iter()
            .flat_map(|base| {
                (v.min..=v.max).map(move |x| {
                    let mut next = base.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    out
}

/// Every location must offer every input under every variable valuation,
/// everywhere the invariant admits.
pub fn check_input_total(m: &Tioa) -> Result<(), String> {
    for (li, l) in m.locations.iter().enumerate() {
        let inv = Federation::from_zone(m.invariant_zone(li));
        for a in &m.inputs {
            for vars in var_valuations(m) {
                let mut cover = Federation::empty(m.clocks.len());
                for e in m.edges.iter().filter(|e| e.source == l.id && e.action == *a) {
                    if m.vars_satisfy(&e.guard, &vars) {
                        cover = cover.union(&m.guard_clock_fed(&e.guard));
                    }
                }
                if !cover.includes(&inv) {
                    return Err(format!("location {} not total on {a} at vars {vars:?}", l.id));
                }
            }
        }
    }
    Ok(())
}

// -- Mutant single-edit distance ----------------------------------------

/// A mutant differs from its source in exactly one element (Msl's fresh
/// sink plus its self-loops count as one edit attached to the redirected
/// edge).
pub fn check_single_edit(m: &Tioa, mt: &Mutant) -> Result<(), String> {
    let mu = &mt.model;
    if mu.clocks != m.clocks
        || mu.inputs != m.inputs
        || mu.outputs != m.outputs
        || mu.variables != m.variables
        || mu.initial != m.initial
    {
        return Err(format!("{}: declaration section changed", mt.id));
    }
    let changed_locs = m.locations.iter().zip(&mu.locations).filter(|(a, b)| a != b).count();
    let added_locs = &mu.locations[m.locations.len()..];
    let changed_edges = m.edges.iter().zip(&mu.edges).filter(|(a, b)| a != b).count();
    let added_edges = &mu.edges[m.edges.len()..];
    let single = match (changed_locs, added_locs, changed_edges, added_edges.is_empty()) {
        // Invariant edit.
        (1, [], 0, true) => true,
        // Edge edit in place.
        (0, [], 1, true) => true,
        // Msl: one redirected edge plus one fresh input-enabled sink.
        (0, [sink], 1, false) => {
            sink.kind == LocationKind::Sink
                && added_edges.iter().all(|e| e.source == sink.id && e.target == sink.id)
        }
        _ => false,
    };
    if single {
        Ok(())
    } else {
        Err(format!(
            "{}: not a single edit ({changed_locs} locs changed, {} added, {changed_edges} \
             edges changed, {} added)",
            mt.id,
            added_locs.len(),
            added_edges.len()
        ))
    }
}

// -- Strategy rule disjointness -------------------------------------------

fn discrete_key(r: &Rule) -> (&str, &str, &[i64], &[i64]) {
    (&r.spec_location, &r.mutant_location, &r.spec_vars, &r.mutant_vars)
}

/// Within one discrete product state, the driver must never face two
/// applicable rules.
pub fn check_rule_disjointness(rules: &[Rule]) -> Result<(), String> {
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            if discrete_key(a) == discrete_key(b) && !a.when.intersect(&b.when).is_empty() {
                return Err(format!("overlapping rules at {:?}", discrete_key(a)));
            }
        }
    }
    Ok(())
}
