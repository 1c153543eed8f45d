use num::rational::Ratio;
use num::Zero;

use super::Bound;

/// A canonical difference-bound matrix over `clocks` clocks plus the
/// reference clock 0. Entry `(i, j)` bounds `x_i - x_j`.
///
/// Every `Dbm` handed out by this module is canonical (closed under the
/// triangle inequality) and non-empty unless stated otherwise.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dbm {
    dim: usize,
    m: Vec<Bound>,
}

pub type Point = Vec<Ratio<i64>>;

impl Dbm {
    /// The zone where every clock equals 0.
    pub fn zero(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        Dbm {
            dim,
            m: vec![Bound::ZERO; dim * dim],
        }
    }

    /// The zone of all non-negative valuations.
    pub fn universe(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        let mut m = vec![Bound::INF; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::ZERO;
            // x_0 - x_i <= 0, i.e. clocks are non-negative.
            m[i] = Bound::ZERO;
        }
        Dbm { dim, m }
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn bound(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    /// All-pairs-shortest-path closure. Returns `None` if the zone is
    /// empty (some diagonal goes negative).
    pub fn canonicalize(mut self) -> Option<Dbm> {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.bound(i, k);
                if ik.is_inf() {
                    continue;
                }
                for j in 0..n {
                    let new = ik.add(self.bound(k, j));
                    if new < self.bound(i, j) {
                        self.set(i, j, new);
                    }
                }
            }
        }
        for i in 0..n {
            if self.bound(i, i) < Bound::ZERO {
                return None;
            }
        }
        Some(self)
    }

    /// Classic k-extrapolation: bounds above `k` become infinite and
    /// lower bounds below `-k` relax to `> k`. Sound for reachability
    /// whenever every guard and invariant constant is at most `k`.
    pub fn extrapolated(&self, k: i64) -> Dbm {
        let mut out = self.clone();
        let hi = Bound::weak(k);
        let lo = Bound::strict(-k);
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = self.bound(i, j);
                if b > hi {
                    out.set(i, j, Bound::INF);
                } else if b < lo {
                    out.set(i, j, lo);
                }
            }
        }
        // Extrapolation only enlarges the zone, so closure cannot empty it.
        out.canonicalize().expect("extrapolation keeps the zone non-empty")
    }

    /// Intersect with `x_i - x_j ≺ c`. Canonical in, canonical or empty out.
    pub fn constrained(&self, i: usize, j: usize, b: Bound) -> Option<Dbm> {
        if b >= self.bound(i, j) {
            return Some(self.clone());
        }
        // Quick emptiness: new bound plus the reverse bound negative.
        if !b.is_inf() && b.add(self.bound(j, i)) < Bound::ZERO {
            return None;
        }
        let mut z = self.clone();
        z.set(i, j, b);
        z.canonicalize()
    }

    pub fn intersect(&self, other: &Dbm) -> Option<Dbm> {
        debug_assert_eq!(self.dim, other.dim);
        let mut z = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = other.bound(i, j);
                if b < z.bound(i, j) {
                    z.set(i, j, b);
                }
            }
        }
        z.canonicalize()
    }

    /// Future operator: remove upper bounds on all clocks.
    pub fn up(&self) -> Dbm {
        let mut z = self.clone();
        for i in 1..self.dim {
            z.set(i, 0, Bound::INF);
        }
        // Removing upper bounds preserves canonical form.
        z
    }

    /// Past operator: remove lower bounds on all clocks (clocks stay
    /// non-negative).
    pub fn down(&self) -> Dbm {
        let mut z = self.clone();
        for j in 1..self.dim {
            z.set(0, j, Bound::ZERO);
        }
        z.canonicalize().expect("down of a non-empty zone is non-empty")
    }

    /// Set each clock in `clocks` (1-based indices) to 0.
    pub fn reset(&self, clocks: &[usize]) -> Dbm {
        let mut z = self.clone();
        for &i in clocks {
            debug_assert!(i >= 1 && i < self.dim);
            for j in 0..self.dim {
                z.set(i, j, z.bound(0, j));
                z.set(j, i, z.bound(j, 0));
            }
            z.set(i, i, Bound::ZERO);
            z.set(i, 0, Bound::ZERO);
            z.set(0, i, Bound::ZERO);
        }
        z.canonicalize().expect("reset of a non-empty zone is non-empty")
    }

    /// Free a clock entirely (used when embedding zones into a larger
    /// clock set): no constraints except non-negativity.
    pub fn free(&self, i: usize) -> Dbm {
        let mut z = self.clone();
        for j in 0..self.dim {
            if j != i {
                z.set(i, j, Bound::INF);
                z.set(j, i, z.bound(j, 0));
            }
        }
        z.set(i, 0, Bound::INF);
        z.set(0, i, Bound::ZERO);
        z.canonicalize().expect("free of a non-empty zone is non-empty")
    }

    /// Topological closure: weaken every strict bound. The result is the
    /// smallest closed zone containing this one.
    pub fn closed(&self) -> Dbm {
        let mut z = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    let b = z.bound(i, j);
                    if b.is_strict() {
                        z.set(i, j, Bound::weak(b.constant()));
                    }
                }
            }
        }
        z.canonicalize().expect("closure of a non-empty zone is non-empty")
    }

    /// Convex subset test; exact for canonical DBMs.
    pub fn subset_of(&self, other: &Dbm) -> bool {
        (0..self.dim * self.dim).all(|k| self.m[k] <= other.m[k])
    }

    /// Membership of a concrete valuation (`point[i-1]` is clock i).
    pub fn contains(&self, point: &[Ratio<i64>]) -> bool {
        debug_assert_eq!(point.len(), self.clocks());
        let val = |i: usize| {
            if i == 0 {
                Ratio::zero()
            } else {
                point[i - 1]
            }
        };
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = self.bound(i, j);
                if b.is_inf() {
                    continue;
                }
                let d = val(i) - val(j);
                if !b.admits(*d.numer(), *d.denom()) {
                    return false;
                }
            }
        }
        true
    }

    /// A concrete valuation inside the zone. Prefers closed lower
    /// endpoints, otherwise midpoints, so half-integer witnesses come out
    /// for integer-constant zones.
    pub fn witness(&self) -> Point {
        let mut vals: Vec<Ratio<i64>> = vec![Ratio::zero()];
        for i in 1..self.dim {
            // Feasible interval for x_i given already-fixed x_0..x_{i-1}.
            let mut lo = Ratio::zero();
            let mut lo_open = false;
            let mut hi: Option<Ratio<i64>> = None;
            let mut hi_open = false;
            for (j, vj) in vals.iter().enumerate() {
                // x_j - x_i ≺ c  =>  x_i (≻) x_j - c
                let b = self.bound(j, i);
                if !b.is_inf() {
                    let cand = vj - Ratio::from_integer(b.constant());
                    if cand > lo || (cand == lo && b.is_strict() && !lo_open) {
                        lo = cand;
                        lo_open = b.is_strict();
                    }
                }
                // x_i - x_j ≺ c  =>  x_i (≺) c + x_j
                let b = self.bound(i, j);
                if !b.is_inf() {
                    let cand = vj + Ratio::from_integer(b.constant());
                    let tighter = match hi {
                        None => true,
                        Some(h) => cand < h || (cand == h && b.is_strict() && !hi_open),
                    };
                    if tighter {
                        hi = Some(cand);
                        hi_open = b.is_strict();
                    }
                }
            }
            let v = if !lo_open {
                lo
            } else {
                match hi {
                    Some(h) => (lo + h) / Ratio::from_integer(2),
                    None => lo + Ratio::new(1, 2),
                }
            };
            vals.push(v);
        }
        vals.remove(0);
        vals
    }

    /// Pairwise constraints as `(i, j, bound)` triples, skipping infinite
    /// and diagonal entries.
    pub fn constraints(&self) -> Vec<(usize, usize, Bound)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = self.bound(i, j);
                if !b.is_inf() {
                    out.push((i, j, b));
                }
            }
        }
        out
    }

    /// Build a zone over `clocks` clocks from constraint triples.
    pub fn from_constraints(
        clocks: usize,
        cs: &[(usize, usize, Bound)],
    ) -> Option<Dbm> {
        let mut z = Dbm::universe(clocks);
        for &(i, j, b) in cs {
            if b < z.bound(i, j) {
                z.set(i, j, b);
            }
        }
        z.canonicalize()
    }
}
