//! Tester strategies: per discrete configuration, disjoint guarded rules
//! telling the driver to send an input, await an output, or let time
//! pass. Serialized as versioned JSON with human-readable constraints
//! over `.spec` / `.mut` suffixed clock names.

use serde::{Deserialize, Serialize};

use crate::zones::{Bound, Dbm, Federation};

pub const STRATEGY_VERSION: u32 = 1;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RuleKind {
    /// Send this input now.
    Input { action: String },
    /// Wait for the implementation to produce an output.
    Await,
    /// Let time pass until another rule applies or a verdict is reached.
    Delay,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub spec_location: String,
    pub mutant_location: String,
    pub spec_vars: Vec<i64>,
    pub mutant_vars: Vec<i64>,
    pub kind: RuleKind,
    /// Distance to a verdict: rank 0 conditions sit on a goal.
    pub rank: usize,
    pub when: Federation,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Strategy {
    pub mutant: String,
    pub spec_clocks: Vec<String>,
    pub mutant_clocks: Vec<String>,
    pub spec_vars: Vec<String>,
    pub mutant_vars: Vec<String>,
    pub rules: Vec<Rule>,
}

impl Strategy {
    /// Product clock count: spec clocks first, mutant clocks shifted.
    pub fn clocks(&self) -> usize {
        self.spec_clocks.len() + self.mutant_clocks.len()
    }
}

// --- wire form -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WireStrategy {
    version: u32,
    mutant: String,
    spec_clocks: Vec<String>,
    mutant_clocks: Vec<String>,
    spec_vars: Vec<String>,
    mutant_vars: Vec<String>,
    rules: Vec<WireRule>,
}

#[derive(Serialize, Deserialize)]
struct WireRule {
    spec_location: String,
    mutant_location: String,
    spec_vars: Vec<i64>,
    mutant_vars: Vec<i64>,
    #[serde(flatten)]
    kind: RuleKind,
    rank: usize,
    /// Disjunction of conjunctions of constraint strings; an empty
    /// conjunction is the universal zone.
    when: Vec<Vec<String>>,
}

/// Product clock index to display name: spec clocks get `.spec`, mutant
/// clocks `.mut`.
fn clock_name(s: &Strategy, i: usize) -> String {
    debug_assert!(i >= 1);
    if i <= s.spec_clocks.len() {
        format!("{}.spec", s.spec_clocks[i - 1])
    } else {
        format!("{}.mut", s.mutant_clocks[i - 1 - s.spec_clocks.len()])
    }
}

fn render_zone(s: &Strategy, z: &Dbm) -> Vec<String> {
    let mut out = Vec::new();
    for (i, j, b) in z.constraints() {
        let text = if j == 0 {
            // x - 0 < c
            let op = if b.is_strict() { "<" } else { "<=" };
            format!("{} {} {}", clock_name(s, i), op, b.constant())
        } else if i == 0 {
            // 0 - x < c  <=>  x > -c
            let op = if b.is_strict() { ">" } else { ">=" };
            format!("{} {} {}", clock_name(s, j), op, -b.constant())
        } else {
            let op = if b.is_strict() { "<" } else { "<=" };
            format!("{} - {} {} {}", clock_name(s, i), clock_name(s, j), op, b.constant())
        };
        out.push(text);
    }
    out
}

fn parse_term(s: &Strategy, term: &str) -> Result<usize, String> {
    if let Some(name) = term.strip_suffix(".spec") {
        return s
            .spec_clocks
            .iter()
            .position(|c| c == name)
            .map(|i| i + 1)
            .ok_or_else(|| format!("unknown spec clock `{name}`"));
    }
    if let Some(name) = term.strip_suffix(".mut") {
        return s
            .mutant_clocks
            .iter()
            .position(|c| c == name)
            .map(|i| i + 1 + s.spec_clocks.len())
            .ok_or_else(|| format!("unknown mutant clock `{name}`"));
    }
    Err(format!("clock `{term}` lacks a .spec/.mut suffix"))
}

fn parse_constraint(s: &Strategy, text: &str) -> Result<(usize, usize, Bound), String> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let (lhs, op, c): (&[&str], &str, i64) = match toks.as_slice() {
        [_, op, c] => (&toks[..1], op, c.parse().map_err(|_| format!("bad constant in `{text}`"))?),
        [_, "-", _, op, c] => {
            (&toks[..3], op, c.parse().map_err(|_| format!("bad constant in `{text}`"))?)
        }
        _ => return Err(format!("malformed constraint `{text}`")),
    };
    let (i, j) = match lhs {
        [t] => match op {
            "<" | "<=" => (parse_term(s, t)?, 0),
            ">" | ">=" => (0, parse_term(s, t)?),
            _ => return Err(format!("bad operator in `{text}`")),
        },
        [t1, "-", t2] => (parse_term(s, t1)?, parse_term(s, t2)?),
        _ => unreachable!(),
    };
    let b = match op {
        "<" => Bound::strict(c),
        "<=" => Bound::weak(c),
        ">" => Bound::strict(-c),
        ">=" => Bound::weak(-c),
        _ => return Err(format!("bad operator in `{text}`")),
    };
    Ok((i, j, b))
}

pub fn serialize_strategy(s: &Strategy) -> Vec<u8> {
    let wire = WireStrategy {
        version: STRATEGY_VERSION,
        mutant: s.mutant.clone(),
        spec_clocks: s.spec_clocks.clone(),
        mutant_clocks: s.mutant_clocks.clone(),
        spec_vars: s.spec_vars.clone(),
        mutant_vars: s.mutant_vars.clone(),
        rules: s
            .rules
            .iter()
            .map(|r| WireRule {
                spec_location: r.spec_location.clone(),
                mutant_location: r.mutant_location.clone(),
                spec_vars: r.spec_vars.clone(),
                mutant_vars: r.mutant_vars.clone(),
                kind: r.kind.clone(),
                rank: r.rank,
                when: r.when.zones().iter().map(|z| render_zone(s, z)).collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&wire).expect("strategies are serializable");
    out.push(b'\n');
    out
}

pub fn parse_strategy(bytes: &[u8]) -> Result<Strategy, String> {
    let wire: WireStrategy =
        serde_json::from_slice(bytes).map_err(|e| format!("strategy syntax: {e}"))?;
    if wire.version != STRATEGY_VERSION {
        return Err(format!("unsupported strategy version {}", wire.version));
    }
    let mut s = Strategy {
        mutant: wire.mutant,
        spec_clocks: wire.spec_clocks,
        mutant_clocks: wire.mutant_clocks,
        spec_vars: wire.spec_vars,
        mutant_vars: wire.mutant_vars,
        rules: Vec::new(),
    };
    let dim = s.clocks();
    for r in wire.rules {
        let mut fed = Federation::empty(dim);
        for piece in &r.when {
            let mut cs = Vec::new();
            for text in piece {
                cs.push(parse_constraint(&s, text)?);
            }
            if let Some(z) = Dbm::from_constraints(dim, &cs) {
                fed.push(z);
            }
        }
        s.rules.push(Rule {
            spec_location: r.spec_location,
            mutant_location: r.mutant_location,
            spec_vars: r.spec_vars,
            mutant_vars: r.mutant_vars,
            kind: r.kind,
            rank: r.rank,
            when: fed,
        });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Strategy {
        let dim = 2;
        let z = Dbm::from_constraints(
            dim,
            &[(1, 0, Bound::weak(3)), (0, 2, Bound::strict(-1)), (1, 2, Bound::strict(2))],
        )
        .unwrap();
        Strategy {
            mutant: "Mgc:3".into(),
            spec_clocks: vec!["x".into()],
            mutant_clocks: vec!["x".into()],
            spec_vars: vec!["free".into()],
            mutant_vars: vec!["free".into()],
            rules: vec![
                Rule {
                    spec_location: "L0".into(),
                    mutant_location: "L0".into(),
                    spec_vars: vec![1],
                    mutant_vars: vec![1],
                    kind: RuleKind::Input { action: "coin".into() },
                    rank: 2,
                    when: Federation::from_zone(z),
                },
                Rule {
                    spec_location: "L1".into(),
                    mutant_location: "L1".into(),
                    spec_vars: vec![0],
                    mutant_vars: vec![0],
                    kind: RuleKind::Delay,
                    rank: 0,
                    when: Federation::universe(2),
                },
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let bytes = serialize_strategy(&s);
        let back = parse_strategy(&bytes).unwrap();
        assert_eq!(back, s);
        // And byte-stable through a second trip.
        assert_eq!(serialize_strategy(&back), bytes);
    }

    #[test]
    fn constraint_strings_are_readable() {
        let s = sample();
        let text = String::from_utf8(serialize_strategy(&s)).unwrap();
        assert!(text.contains("x.spec <= 3"));
        assert!(text.contains("x.mut > 1"));
        assert!(text.contains("x.spec - x.mut < 2"));
    }

    #[test]
    fn rejects_unknown_clock_and_version() {
        let s = sample();
        let mut text = String::from_utf8(serialize_strategy(&s)).unwrap();
        text = text.replace("x.spec <= 3", "y.spec <= 3");
        assert!(parse_strategy(text.as_bytes()).is_err());
        let bumped = String::from_utf8(serialize_strategy(&s))
            .unwrap()
            .replace("\"version\": 1", "\"version\": 99");
        assert!(parse_strategy(bumped.as_bytes()).is_err());
    }
}
