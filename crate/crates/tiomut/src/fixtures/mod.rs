//! Reference models, a model-driven SUT implementation speaking the wire
//! protocol, and fault-seeded SUT variants.

mod corpus;
mod sut;

pub use corpus::{car_alarm, car_alarm_variants, labeled_pairs, pacer, retailer, FaultSeed, LabeledPair};
pub use sut::{run_sut, InProcessSut, OutputPolicy, SutMode};
