//! Refinement checking between a mutant and its specification: the
//! symbolic timed game, strategy synthesis, and a discrete bounded
//! oracle used to cross-check both.

mod game;
mod oracle;
mod product;
mod strategy;

pub use game::{synthesize_strategy, ConformanceOutcome, GameError};
pub use oracle::{discrete_conformance_oracle, OracleOutcome};
pub use product::{build_product, Branch, BranchKind, DKey, Node, Product};
pub use strategy::{
    parse_strategy, serialize_strategy, Rule, RuleKind, Strategy, STRATEGY_VERSION,
};
