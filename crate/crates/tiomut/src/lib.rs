//! Model-based mutation testing for timed I/O automata.
//!
//! The pipeline: parse a test model, mutate it with syntactic operators,
//! check each mutant against the model by solving a timed refinement
//! game, turn non-refinement witnesses into adaptive test strategies,
//! and execute those strategies against a black-box system under test
//! over its standard I/O streams, in real or simulated time.

pub mod conformance;
pub mod driver;
pub mod fixtures;
pub mod harness;
pub mod mutation;
pub mod tioa;
pub mod zones;
