#![allow(dead_code)]

use proptest::prelude::*;
use regeq::regex_core::{Alphabet, Regex};
use regeq::tooling::{rng, symbol_alphabet};

pub fn xy() -> Alphabet {
    symbol_alphabet(2)
}

/// Regexes over {x, y} with ε and φ leaves.
pub fn regex(depth: u32) -> impl Strategy<Value = Regex> {
    let leaf = prop_oneof![
        1 => Just(Regex::Eps),
        1 => Just(Regex::Phi),
        4 => Just(Regex::Sym('x')),
        4 => Just(Regex::Sym('y')),
    ];
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::alt(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::seq(a, b)),
            inner.prop_map(Regex::star),
        ]
    })
}

/// A seeded generator, for the library's own random builders.
pub fn seeded() -> impl Strategy<Value = rand_xoshiro::SplitMix64> {
    any::<u64>().prop_map(rng)
}
