use std::collections::HashSet;
use std::fmt;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::zones::{Bound, Dbm, Federation};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
pub enum ConstraintOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl ConstraintOp {
    pub const ALL: [ConstraintOp; 6] = [
        ConstraintOp::Lt,
        ConstraintOp::Le,
        ConstraintOp::Eq,
        ConstraintOp::Ne,
        ConstraintOp::Ge,
        ConstraintOp::Gt,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ConstraintOp::Lt => "<",
            ConstraintOp::Le => "<=",
            ConstraintOp::Eq => "=",
            ConstraintOp::Ne => "!=",
            ConstraintOp::Ge => ">=",
            ConstraintOp::Gt => ">",
        }
    }

    pub fn eval_int(self, lhs: i64, rhs: i64) -> bool {
        match self {
            ConstraintOp::Lt => lhs < rhs,
            ConstraintOp::Le => lhs <= rhs,
            ConstraintOp::Eq => lhs == rhs,
            ConstraintOp::Ne => lhs != rhs,
            ConstraintOp::Ge => lhs >= rhs,
            ConstraintOp::Gt => lhs > rhs,
        }
    }

    pub fn eval_ratio(self, lhs: Ratio<i64>, rhs: i64) -> bool {
        let rhs = Ratio::from_integer(rhs);
        match self {
            ConstraintOp::Lt => lhs < rhs,
            ConstraintOp::Le => lhs <= rhs,
            ConstraintOp::Eq => lhs == rhs,
            ConstraintOp::Ne => lhs != rhs,
            ConstraintOp::Ge => lhs >= rhs,
            ConstraintOp::Gt => lhs > rhs,
        }
    }
}

/// A single `operand op constant` constraint over a clock or variable.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
pub struct BasicConstraint {
    pub operand: String,
    pub op: ConstraintOp,
    pub constant: i64,
}

impl fmt::Display for BasicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.operand, self.op.symbol(), self.constant)
    }
}

/// A conjunction of basic constraints with set semantics: duplicates are
/// collapsed on construction, order of first occurrence is kept.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug, Default)]
#[serde(transparent)]
pub struct Guard(Vec<BasicConstraint>);

impl Guard {
    pub fn new(constraints: Vec<BasicConstraint>) -> Guard {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in constraints {
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        Guard(out)
    }

    pub fn always() -> Guard {
        Guard(Vec::new())
    }

    pub fn constraints(&self) -> &[BasicConstraint] {
        &self.0
    }

    pub fn is_always(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" && "))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
pub struct VarDecl {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub init: i64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
pub enum LocationKind {
    Normal,
    Initial,
    Universal,
    Sink,
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
pub struct Location {
    pub id: String,
    pub kind: LocationKind,
    #[serde(default)]
    pub invariant: Guard,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Debug)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub action: String,
    pub direction: Direction,
    #[serde(default)]
    pub guard: Guard,
    #[serde(default)]
    pub resets: Vec<String>,
    #[serde(default)]
    pub update: Vec<(String, i64)>,
}

/// A syntactic timed I/O automaton, immutable after construction.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct Tioa {
    pub name: String,
    pub clocks: Vec<String>,
    pub variables: Vec<VarDecl>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub locations: Vec<Location>,
    pub initial: String,
    pub edges: Vec<Edge>,
}

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid model:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

/// Parse and validate a model document.
pub fn parse_model(bytes: &[u8]) -> Result<Tioa, ModelError> {
    let model: Tioa = serde_json::from_slice(bytes)?;
    let diags = model.validate();
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(ModelError::Invalid(diags))
    }
}

pub fn serialize_model(m: &Tioa) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(m).expect("model serialization cannot fail");
    out.push(b'\n');
    out
}

impl Tioa {
    pub fn loc_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    /// 1-based clock index matching the DBM layout.
    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == name).map(|i| i + 1)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn is_input(&self, action: &str) -> bool {
        self.inputs.iter().any(|a| a == action)
    }

    pub fn is_output(&self, action: &str) -> bool {
        self.outputs.iter().any(|a| a == action)
    }

    pub fn initial_index(&self) -> usize {
        self.loc_index(&self.initial).expect("validated model")
    }

    pub fn initial_vars(&self) -> Vec<i64> {
        self.variables.iter().map(|v| v.init).collect()
    }

    /// Largest constant appearing in any guard or invariant; used to cap
    /// oracle exploration.
    pub fn max_constant(&self) -> i64 {
        let mut m = 0;
        for l in &self.locations {
            for c in l.invariant.constraints() {
                m = m.max(c.constant.abs());
            }
        }
        for e in &self.edges {
            for c in e.guard.constraints() {
                m = m.max(c.constant.abs());
            }
        }
        m
    }

    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        let loc_ids: HashSet<&str> = self.locations.iter().map(|l| l.id.as_str()).collect();
        if loc_ids.len() != self.locations.len() {
            diags.push("locations: duplicate location id".into());
        }
        let initial_count = self
            .locations
            .iter()
            .filter(|l| l.kind == LocationKind::Initial)
            .count();
        if self.locations.is_empty() || initial_count == 0 {
            diags.push("locations: no initial location".into());
        } else if initial_count > 1 {
            diags.push("locations: more than one initial location".into());
        }
        if !loc_ids.contains(self.initial.as_str()) {
            diags.push(format!("initial: unknown location `{}`", self.initial));
        } else if let Some(l) = self.locations.iter().find(|l| l.id == self.initial) {
            if l.kind != LocationKind::Initial {
                diags.push(format!(
                    "initial: location `{}` is not marked initial",
                    self.initial
                ));
            }
        }
        for a in &self.inputs {
            if self.outputs.contains(a) {
                diags.push(format!("inputs/outputs: action `{a}` declared as both"));
            }
        }
        for v in &self.variables {
            if !(v.min <= v.init && v.init <= v.max) {
                diags.push(format!(
                    "variables.{}: init {} outside bounds [{}, {}]",
                    v.name, v.init, v.min, v.max
                ));
            }
        }
        for (li, l) in self.locations.iter().enumerate() {
            for c in l.invariant.constraints() {
                if self.clock_index(&c.operand).is_none() {
                    diags.push(format!(
                        "locations[{li}].invariant: operand `{}` is not a clock",
                        c.operand
                    ));
                } else if !matches!(c.op, ConstraintOp::Lt | ConstraintOp::Le) {
                    diags.push(format!(
                        "locations[{li}].invariant: invariant operator must be < or <="
                    ));
                } else if c.constant < 0 {
                    diags.push(format!(
                        "locations[{li}].invariant: constant must be non-negative"
                    ));
                }
            }
        }
        for (ei, e) in self.edges.iter().enumerate() {
            if !loc_ids.contains(e.source.as_str()) {
                diags.push(format!("edges[{ei}].source: unknown location `{}`", e.source));
            }
            if !loc_ids.contains(e.target.as_str()) {
                diags.push(format!("edges[{ei}].target: unknown location `{}`", e.target));
            }
            let declared = match e.direction {
                Direction::Input => &self.inputs,
                Direction::Output => &self.outputs,
            };
            if !declared.contains(&e.action) {
                diags.push(format!(
                    "edges[{ei}].action: `{}` is not a declared {} action",
                    e.action,
                    match e.direction {
                        Direction::Input => "input",
                        Direction::Output => "output",
                    }
                ));
            }
            for c in e.guard.constraints() {
                if self.clock_index(&c.operand).is_none() && self.var_index(&c.operand).is_none()
                {
                    diags.push(format!(
                        "edges[{ei}].guard: unknown reference `{}`",
                        c.operand
                    ));
                }
            }
            for r in &e.resets {
                if self.clock_index(r).is_none() {
                    diags.push(format!("edges[{ei}].resets: unknown clock `{r}`"));
                }
            }
            for (v, k) in &e.update {
                match self.variables.iter().find(|d| &d.name == v) {
                    None => diags.push(format!("edges[{ei}].update: unknown variable `{v}`")),
                    Some(d) => {
                        if *k < d.min || *k > d.max {
                            diags.push(format!(
                                "edges[{ei}].update: value {k} outside bounds of `{v}`"
                            ));
                        }
                    }
                }
            }
        }
        diags
    }

    /// Split a guard into its variable constraints and the federation of
    /// clock valuations it admits (over this model's clocks).
    pub fn guard_clock_fed(&self, g: &Guard) -> Federation {
        let mut fed = Federation::universe(self.clocks.len());
        for c in g.constraints() {
            if let Some(i) = self.clock_index(&c.operand) {
                fed = constrain_clock(&fed, i, c.op, c.constant);
            }
        }
        fed
    }

    pub fn guard_var_part<'g>(&self, g: &'g Guard) -> Vec<&'g BasicConstraint> {
        g.constraints()
            .iter()
            .filter(|c| self.var_index(&c.operand).is_some())
            .collect()
    }

    pub fn vars_satisfy(&self, g: &Guard, vars: &[i64]) -> bool {
        g.constraints().iter().all(|c| match self.var_index(&c.operand) {
            Some(vi) => c.op.eval_int(vars[vi], c.constant),
            None => true,
        })
    }

    /// The location invariant as a clock zone (always convex: invariants
    /// only use < and <=).
    pub fn invariant_zone(&self, loc: usize) -> Dbm {
        let mut z = Dbm::universe(self.clocks.len());
        for c in self.locations[loc].invariant.constraints() {
            if let Some(i) = self.clock_index(&c.operand) {
                let b = match c.op {
                    ConstraintOp::Lt => Bound::strict(c.constant),
                    _ => Bound::weak(c.constant),
                };
                z = z
                    .constrained(i, 0, b)
                    .expect("non-negative invariant bound cannot empty the universe");
            }
        }
        z
    }
}

/// Intersect a federation with `clock op constant`; `!=` splits into two
/// zones.
pub fn constrain_clock(fed: &Federation, i: usize, op: ConstraintOp, c: i64) -> Federation {
    match op {
        ConstraintOp::Lt => fed.constrained(i, 0, Bound::strict(c)),
        ConstraintOp::Le => fed.constrained(i, 0, Bound::weak(c)),
        ConstraintOp::Ge => fed.constrained(0, i, Bound::weak(-c)),
        ConstraintOp::Gt => fed.constrained(0, i, Bound::strict(-c)),
        ConstraintOp::Eq => fed
            .constrained(i, 0, Bound::weak(c))
            .constrained(0, i, Bound::weak(-c)),
        ConstraintOp::Ne => {
            let lt = fed.constrained(i, 0, Bound::strict(c));
            let gt = fed.constrained(0, i, Bound::strict(-c));
            lt.union(&gt)
        }
    }
}
