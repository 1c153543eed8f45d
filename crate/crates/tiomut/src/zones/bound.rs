use std::fmt;

/// A DBM entry: an upper bound on a clock difference, either `< c`,
/// `<= c`, or unbounded.
///
/// Encoded as `2c` for the strict bound `< c` and `2c + 1` for the weak
/// bound `<= c`, so that the natural integer order is: smaller constant
/// first, then strict before weak at the same constant.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bound(i64);

const INF_RAW: i64 = i64::MAX;

impl Bound {
    pub const INF: Bound = Bound(INF_RAW);
    /// `<= 0`, the diagonal entry of every consistent DBM.
    pub const ZERO: Bound = Bound(1);

    pub fn weak(c: i64) -> Bound {
        Bound(2 * c + 1)
    }

    pub fn strict(c: i64) -> Bound {
        Bound(2 * c)
    }

    pub fn is_inf(self) -> bool {
        self.0 == INF_RAW
    }

    pub fn is_strict(self) -> bool {
        !self.is_inf() && self.0 & 1 == 0
    }

    pub fn constant(self) -> i64 {
        debug_assert!(!self.is_inf());
        self.0 >> 1
    }

    /// Bound addition: constants add, the sum is weak only if both
    /// operands are weak.
    pub fn add(self, other: Bound) -> Bound {
        if self.is_inf() || other.is_inf() {
            Bound::INF
        } else {
            Bound(self.0 + other.0 - ((self.0 | other.0) & 1))
        }
    }

    /// The complementary bound: not (x - y ≺ c) is (y - x ≺' -c) with
    /// flipped strictness.
    pub fn negate(self) -> Bound {
        debug_assert!(!self.is_inf());
        Bound(1 - self.0)
    }

    /// Does a concrete difference `num/den` (den > 0) satisfy this bound?
    pub fn admits(self, num: i64, den: i64) -> bool {
        if self.is_inf() {
            return true;
        }
        // num/den ≺ c  <=>  num ≺ c*den
        let rhs = self.constant() * den;
        if self.is_strict() {
            num < rhs
        } else {
            num <= rhs
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else if self.is_strict() {
            write!(f, "<{}", self.constant())
        } else {
            write!(f, "<={}", self.constant())
        }
    }
}
