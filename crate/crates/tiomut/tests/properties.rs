//! Property suites over module invariants: zone algebra against a dense
//! grid oracle, completion input-enabledness, mutant single-edit
//! distance, strategy rule disjointness, and output-removal conformance.

use proptest::prelude::*;

use tiomut::conformance::{synthesize_strategy, ConformanceOutcome};
use tiomut::fixtures::{car_alarm, pacer, retailer};
use tiomut::mutation::{generate_mutants, OperatorId};
use tiomut::tioa::{angelic_complete, demonic_complete, is_deterministic, DeterminismResult, Tioa};
use tiomut::zones::Bound;

mod common;
use common::{check_input_total, check_rule_disjointness, check_single_edit, check_zone_algebra, Cs};

fn arb_bound() -> impl Strategy<Value = Bound> {
    (any::<bool>(), -4i64..=4).prop_map(|(s, c)| if s { Bound::strict(c) } else { Bound::weak(c) })
}

fn arb_zone() -> impl Strategy<Value = Cs> {
    prop::collection::vec(
        ((0usize..3, 0usize..3).prop_filter("off-diagonal", |(i, j)| i != j), arb_bound()),
        0..5,
    )
    .prop_map(|v| v.into_iter().map(|((i, j), b)| (i, j, b)).collect())
}

fn arb_fed() -> impl Strategy<Value = Vec<Cs>> {
    prop::collection::vec(arb_zone(), 1..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zone_ops_match_grid_oracle(a in arb_fed(), b in arb_fed()) {
        if let Err(e) = check_zone_algebra(&a, &b) {
            return Err(TestCaseError::fail(e));
        }
    }
}

fn corpus_and_mutants() -> Vec<(String, Tioa)> {
    let mut out = Vec::new();
    for (name, m) in [("retailer", retailer()), ("car_alarm", car_alarm()), ("pacer", pacer())] {
        for mt in generate_mutants(&m, &OperatorId::ALL) {
            out.push((format!("{name}/{}", mt.id), mt.model));
        }
        out.push((name.to_string(), m));
    }
    out
}

#[test]
fn completion_is_input_enabled() {
    for (tag, m) in corpus_and_mutants() {
        check_input_total(&demonic_complete(&m)).unwrap_or_else(|e| panic!("demonic {tag}: {e}"));
        check_input_total(&angelic_complete(&m)).unwrap_or_else(|e| panic!("angelic {tag}: {e}"));
    }
}

#[test]
fn mutants_are_single_edits() {
    for (name, m) in [("retailer", retailer()), ("car_alarm", car_alarm()), ("pacer", pacer())] {
        for mt in generate_mutants(&m, &OperatorId::ALL) {
            check_single_edit(&m, &mt).unwrap_or_else(|e| panic!("{name}/{e}"));
        }
    }
}

#[test]
fn strategy_rules_are_disjoint() {
    for (name, m) in [("retailer", retailer()), ("car_alarm", car_alarm())] {
        for mt in generate_mutants(&m, &OperatorId::ALL) {
            if !matches!(is_deterministic(&mt.model), DeterminismResult::Deterministic) {
                continue;
            }
            let s = match synthesize_strategy(&m, &mt.model, &mt.id).unwrap() {
                ConformanceOutcome::Conforms => continue,
                ConformanceOutcome::NonConformant(s) => s,
            };
            check_rule_disjointness(&s.rules).unwrap_or_else(|e| panic!("{name}/{}: {e}", mt.id));
        }
    }
}

// Output-removing mutants conform: disabling an output edge only removes
// behavior, and refinement permits fewer outputs.
#[test]
fn output_disabling_variable_mutants_conform() {
    let m = retailer();
    // Mvu rewrites of coin's `free := 1`; setting 0 can only disable the
    // free-guarded garnish edge.
    let disabling: Vec<_> = generate_mutants(&m, &[OperatorId::Mvu])
        .into_iter()
        .filter(|mt| mt.edit.contains("coin") && mt.edit.contains("(free, 0)"))
        .collect();
    assert!(!disabling.is_empty());
    for mt in disabling {
        let out = synthesize_strategy(&m, &mt.model, &mt.id).unwrap();
        assert!(out.conforms(), "{} should conform: {}", mt.id, mt.edit);
    }
}
