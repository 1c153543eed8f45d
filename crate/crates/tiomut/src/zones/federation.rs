use num::rational::Ratio;

use super::{Bound, Dbm};

/// A finite union of non-empty canonical zones over the same clock count.
///
/// Subtraction produces pairwise-disjoint members; other operations make
/// no disjointness promise.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Federation {
    clocks: usize,
    zones: Vec<Dbm>,
}

impl Federation {
    pub fn empty(clocks: usize) -> Federation {
        Federation {
            clocks,
            zones: Vec::new(),
        }
    }

    pub fn from_zone(z: Dbm) -> Federation {
        Federation {
            clocks: z.clocks(),
            zones: vec![z],
        }
    }

    pub fn universe(clocks: usize) -> Federation {
        Federation::from_zone(Dbm::universe(clocks))
    }

    pub fn clocks(&self) -> usize {
        self.clocks
    }

    pub fn zones(&self) -> &[Dbm] {
        &self.zones
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn push(&mut self, z: Dbm) {
        debug_assert_eq!(z.clocks(), self.clocks);
        // Drop zones already covered by an existing member; cheap
        // convex-inclusion reduction only.
        if self.zones.iter().any(|a| z.subset_of(a)) {
            return;
        }
        self.zones.retain(|a| !a.subset_of(&z));
        self.zones.push(z);
    }

    pub fn union(&self, other: &Federation) -> Federation {
        let mut out = self.clone();
        for z in &other.zones {
            out.push(z.clone());
        }
        out
    }

    pub fn intersect(&self, other: &Federation) -> Federation {
        let mut out = Federation::empty(self.clocks);
        for a in &self.zones {
            for b in &other.zones {
                if let Some(z) = a.intersect(b) {
                    out.push(z);
                }
            }
        }
        out
    }

    pub fn intersect_zone(&self, z: &Dbm) -> Federation {
        let mut out = Federation::empty(self.clocks);
        for a in &self.zones {
            if let Some(r) = a.intersect(z) {
                out.push(r);
            }
        }
        out
    }

    pub fn up(&self) -> Federation {
        self.map(|z| Some(z.up()))
    }

    pub fn down(&self) -> Federation {
        self.map(|z| Some(z.down()))
    }

    pub fn reset(&self, clocks: &[usize]) -> Federation {
        self.map(|z| Some(z.reset(clocks)))
    }

    pub fn constrained(&self, i: usize, j: usize, b: Bound) -> Federation {
        self.map(|z| z.constrained(i, j, b))
    }

    /// Weak preimage of a reset: all valuations sent into `self` by
    /// zeroing `clocks`. Intersect with x = 0 for each reset clock, then
    /// free those clocks.
    pub fn preimage_reset(&self, clocks: &[usize]) -> Federation {
        let mut fed = self.clone();
        for &i in clocks {
            fed = fed
                .constrained(i, 0, Bound::ZERO)
                .constrained(0, i, Bound::ZERO);
        }
        fed.map(|z| {
            let mut z = z.clone();
            for &i in clocks {
                z = z.free(i);
            }
            Some(z)
        })
    }

    fn map(&self, f: impl Fn(&Dbm) -> Option<Dbm>) -> Federation {
        let mut out = Federation::empty(self.clocks);
        for z in &self.zones {
            if let Some(r) = f(z) {
                out.push(r);
            }
        }
        out
    }

    /// Exact set difference. The result's members are pairwise disjoint
    /// (each single-zone subtraction splits along one constraint at a
    /// time), so completion edges built from complements never overlap.
    pub fn subtract(&self, other: &Federation) -> Federation {
        let mut rest: Vec<Dbm> = self.zones.clone();
        for b in &other.zones {
            let mut next = Vec::new();
            for a in rest {
                next.extend(subtract_zone(&a, b));
            }
            rest = next;
        }
        Federation {
            clocks: self.clocks,
            zones: rest,
        }
    }

    /// True iff every valuation of `other` lies in some zone of `self`.
    pub fn includes(&self, other: &Federation) -> bool {
        // Fast path: each zone convex-contained in one of ours.
        if other
            .zones
            .iter()
            .all(|b| self.zones.iter().any(|a| b.subset_of(a)))
        {
            return true;
        }
        other.subtract(self).is_empty()
    }

    pub fn contains(&self, point: &[Ratio<i64>]) -> bool {
        self.zones.iter().any(|z| z.contains(point))
    }

    pub fn witness(&self) -> Option<Vec<Ratio<i64>>> {
        self.zones.first().map(|z| z.witness())
    }
}

/// `a \ b` as disjoint convex pieces: peel off one violated constraint of
/// `b` at a time.
fn subtract_zone(a: &Dbm, b: &Dbm) -> Vec<Dbm> {
    let mut out = Vec::new();
    let mut rest = a.clone();
    for (i, j, bound) in b.constraints() {
        // Piece of `rest` violating this constraint of b.
        if let Some(piece) = rest.constrained(j, i, bound.negate()) {
            out.push(piece);
        }
        match rest.constrained(i, j, bound) {
            Some(r) => rest = r,
            None => return out,
        }
    }
    // What is left satisfies all of b's constraints, i.e. lies inside b.
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: Bound, hi: Bound) -> Dbm {
        let mut cs = Vec::new();
        cs.push((1usize, 0usize, hi));
        cs.push((0usize, 1usize, lo));
        Dbm::from_constraints(1, &cs).unwrap()
    }

    #[test]
    fn subtract_self_is_empty() {
        let f = Federation::from_zone(interval(Bound::weak(-1), Bound::weak(4)));
        assert!(f.subtract(&f).is_empty());
    }

    #[test]
    fn subtract_empty_is_identity() {
        let f = Federation::from_zone(interval(Bound::weak(-1), Bound::weak(4)));
        let d = f.subtract(&Federation::empty(1));
        assert!(f.includes(&d) && d.includes(&f));
    }

    #[test]
    fn halfspace_complement_flips_strictness() {
        // {x >= 0} \ {x > 4} = {x <= 4}
        let all = Federation::universe(1);
        let gt4 = Federation::from_zone(interval(Bound::strict(-4), Bound::INF));
        let d = all.subtract(&gt4);
        assert_eq!(d.zones().len(), 1);
        assert_eq!(d.zones()[0].bound(1, 0), Bound::weak(4));
    }

    #[test]
    fn includes_is_reflexive_and_checks_unions() {
        let a = Federation::from_zone(interval(Bound::weak(0), Bound::weak(2)));
        let b = Federation::from_zone(interval(Bound::weak(0), Bound::weak(3)));
        assert!(a.includes(&a));
        assert!(b.includes(&a));
        assert!(!a.includes(&b));
        // [0,1] u [1,3] includes [0,3] even though neither member does.
        let split = Federation::from_zone(interval(Bound::weak(0), Bound::weak(1)))
            .union(&Federation::from_zone(interval(Bound::weak(-1), Bound::weak(3))));
        assert!(split.includes(&b));
    }

    #[test]
    fn subtraction_pieces_are_disjoint() {
        let a = Federation::universe(2);
        let mut b = Federation::empty(2);
        b.push(
            Dbm::from_constraints(2, &[(1, 0, Bound::weak(3)), (0, 2, Bound::strict(-1))])
                .unwrap(),
        );
        b.push(Dbm::from_constraints(2, &[(2, 1, Bound::strict(0))]).unwrap());
        let d = a.subtract(&b);
        for (i, x) in d.zones().iter().enumerate() {
            for y in &d.zones()[i + 1..] {
                assert!(x.intersect(y).is_none(), "overlapping pieces");
            }
        }
    }
}
