//! Test execution: the line protocol, SUT process handling, and the
//! adaptive rule loop that turns a strategy into a verdict.

mod exec;
mod process;
pub mod wire;

pub use exec::{
    classify_observation, execute_test, step_simulation, CrashReport, ExecutionBounds,
    GrantReply, InconclusiveReason, ObservedEvent, Sut, TestResult, TimeMode, TraceEvent,
    Verdict,
};
pub use process::ProcessSut;
