mod common;

use std::collections::BTreeSet;

use common::{regex, xy};
use proptest::prelude::*;
use regeq::equations::{EquationSystem, Gamma, Strategy};
use regeq::parse_trees::{is_ambiguous_bounded, is_non_overlapping};
use regeq::reg_ops::{
    intersect, intersect_equations, shuffle, shuffle_words, subtract, subtract_equations, ProductMode,
};
use regeq::regex_core::{lang_upto, Regex};
use regeq::tooling::{bench_compare, cli_main, random_dfa, BenchConfig};

fn shuffle_oracle(a: &BTreeSet<String>, b: &BTreeSet<String>, n: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for u in a {
        for v in b {
            if u.len() + v.len() <= n {
                out.extend(shuffle_words(u, v));
            }
        }
    }
    out
}

fn unambiguous(r: Regex) -> bool {
    !is_ambiguous_bounded(&EquationSystem::empty(xy()), &Gamma::Re(r), 5, 24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operations_match_the_oracle(r in regex(3), s in regex(3)) {
        let (lr, ls) = (lang_upto(&r, 6), lang_upto(&s, 6));
        let d = subtract(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap();
        prop_assert_eq!(lang_upto(&d, 6), lr.difference(&ls).cloned().collect::<BTreeSet<_>>());
        let i = intersect(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap();
        prop_assert_eq!(lang_upto(&i, 6), lr.intersection(&ls).cloned().collect::<BTreeSet<_>>());
        let sh = shuffle(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap();
        prop_assert_eq!(lang_upto(&sh, 6), shuffle_oracle(&lr, &ls, 6));
    }

    #[test]
    fn subtraction_and_intersection_are_unambiguous(r in regex(3), s in regex(3)) {
        prop_assert!(unambiguous(subtract(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap()));
        prop_assert!(unambiguous(intersect(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap()));
    }

    #[test]
    fn modes_agree(r in regex(3), s in regex(3)) {
        for op in [subtract, intersect, shuffle] {
            let full = op(&r, &s, Strategy::Default, ProductMode::FullProduct).unwrap();
            let reach = op(&r, &s, Strategy::Default, ProductMode::ReachableOnly).unwrap();
            prop_assert_eq!(lang_upto(&full, 6), lang_upto(&reach, 6));
        }
    }

    #[test]
    fn product_systems_are_non_overlapping(r in regex(3), s in regex(3)) {
        for mode in [ProductMode::FullProduct, ProductMode::ReachableOnly] {
            prop_assert!(is_non_overlapping(&subtract_equations(&r, &s, mode).unwrap().system));
            prop_assert!(is_non_overlapping(&intersect_equations(&r, &s, mode).unwrap().system));
        }
    }

    #[test]
    fn random_dfa_is_deterministic(states in 1usize..=6, seed in any::<u64>()) {
        prop_assert_eq!(random_dfa(states, &xy(), 0.5, seed), random_dfa(states, &xy(), 0.5, seed));
    }
}

#[test]
fn bench_is_deterministic_and_positive() {
    let cfg = BenchConfig {
        cases: 20,
        seed: 3,
        ..BenchConfig::default()
    };
    let a = bench_compare(&cfg).unwrap();
    assert_eq!(a, bench_compare(&cfg).unwrap());
    assert!(a.mean_ratio.values().all(|&r| r > 0.0));
    assert_eq!(a.per_case.len(), 20);
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let code = cli_main(
        std::iter::once("regeq").chain(args.iter().copied()),
        &mut out,
        &mut Vec::new(),
    );
    (code, out)
}

#[test]
fn cli_output_is_byte_identical_and_self_checks() {
    for args in [
        &["diff", "(x+y)*", "(x x)*", "--check", "6"][..],
        &["isect", "x* y", "(x+y)* y", "--mode", "reachable", "--check", "6"],
        &["shuffle", "x y", "y*", "--simplify", "--check", "5"],
        &[
            "diff",
            "x* y*",
            "x*",
            "--rules",
            "basic",
            "--strategy",
            "cycles",
            "--check",
            "6",
        ],
    ] {
        let a = run(args);
        assert_eq!(a, run(args));
        assert_eq!(a.0, 0, "{args:?}");
        assert!(String::from_utf8(a.1).unwrap().ends_with("oracle: OK\n"));
    }
}
