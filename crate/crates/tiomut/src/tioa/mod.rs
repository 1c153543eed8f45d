//! Timed I/O automata: the model file format, validation, completions,
//! determinism checking, and concrete semantics.

mod completion;
mod determinism;
mod model;
mod semantics;

pub use completion::{angelic_complete, demonic_complete, UNIVERSAL_ID};
pub use determinism::{is_deterministic, DeterminismResult, NondetWitness};
pub use model::{
    parse_model, serialize_model, BasicConstraint, ConstraintOp, Direction, Edge, Guard,
    Location, LocationKind, ModelError, Tioa, VarDecl,
};
pub use semantics::{
    can_delay, enabled_edges, enabled_outputs, step_semantics, Move, SemState, StepOutcome,
};
