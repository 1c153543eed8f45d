//! Difference-bound-matrix clock zones and federations.
//!
//! Zones are convex sets of clock valuations described by constraints of
//! the form `x_i - x_j < c` or `x_i - x_j <= c`, with clock 0 as the
//! constant-zero reference clock. A federation is a finite union of
//! non-empty canonical zones over the same clock count.

mod bound;
mod dbm;
mod federation;

pub use bound::Bound;
pub use dbm::Dbm;
pub use federation::Federation;
