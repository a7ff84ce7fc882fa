//! Brzozowski derivatives, canonical derivatives, descendant sets and the
//! expansion form.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::regex_core::{nullable, simp, Alphabet, Regex, SimilarityRules, Symbol};

/// Upper bound on descendant-set size before [`descendants`] gives up.
pub const DESCENDANT_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DerivError {
    #[error("descendant set exceeded {0} elements; canonicalization is not converging")]
    CapExceeded(usize),
}

/// ∂r/∂x, following the textbook case split on nullability of the left factor.
pub fn deriv(r: &Regex, x: Symbol) -> Regex {
    match r {
        Regex::Phi | Regex::Eps => Regex::Phi,
        Regex::Sym(y) => {
            if *y == x {
                Regex::Eps
            } else {
                Regex::Phi
            }
        }
        Regex::Alt(a, b) => Regex::alt(deriv(a, x), deriv(b, x)),
        Regex::Seq(a, b) => {
            let left = Regex::seq(deriv(a, x), (**b).clone());
            if nullable(a) {
                Regex::alt(left, deriv(b, x))
            } else {
                left
            }
        }
        Regex::Star(a) => Regex::seq(deriv(a, x), r.clone()),
    }
}

/// Derivative of `r` by the word `w`, symbol by symbol.
pub fn deriv_word(r: &Regex, w: &str) -> Regex {
    w.chars().fold(r.clone(), |acc, x| deriv(&acc, x))
}

/// simp(∂r/∂x).
pub fn deriv_canonical(r: &Regex, x: Symbol, rules: SimilarityRules) -> Regex {
    simp(&deriv(r, x), rules)
}

/// The canonical descendants of a source expression, in breadth-first
/// discovery order, together with their canonical transitions.
#[derive(Clone, Debug)]
pub struct DescendantSet {
    pub source: Regex,
    pub rules: SimilarityRules,
    pub alphabet: Alphabet,
    /// Canonical descendants; `members[0]` is `simp(source)`.
    pub members: Vec<Regex>,
    /// `delta[i][k]` is the index of simp(∂members[i]/∂alphabet[k]).
    pub delta: Vec<Vec<usize>>,
}

impl DescendantSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, r: &Regex) -> bool {
        self.members.contains(r)
    }

    pub fn index_of(&self, r: &Regex) -> Option<usize> {
        self.members.iter().position(|m| m == r)
    }
}

/// Least set containing simp(r) and closed under canonical derivatives by
/// every symbol of `alphabet`.
pub fn descendants(r: &Regex, alphabet: &Alphabet, rules: SimilarityRules) -> Result<DescendantSet, DerivError> {
    descendants_capped(r, alphabet, rules, DESCENDANT_CAP)
}

pub fn descendants_capped(
    r: &Regex,
    alphabet: &Alphabet,
    rules: SimilarityRules,
    cap: usize,
) -> Result<DescendantSet, DerivError> {
    let start = simp(r, rules);
    let mut members = vec![start.clone()];
    let mut index: HashMap<Regex, usize> = HashMap::from([(start, 0)]);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for &x in alphabet.symbols() {
            let d = deriv_canonical(&members[i], x, rules);
            let j = match index.get(&d) {
                Some(&j) => j,
                None => {
                    if members.len() >= cap {
                        return Err(DerivError::CapExceeded(cap));
                    }
                    let j = members.len();
                    index.insert(d.clone(), j);
                    members.push(d);
                    queue.push_back(j);
                    j
                }
            };
            row.push(j);
        }
        if delta.len() <= i {
            delta.resize(i + 1, Vec::new());
        }
        delta[i] = row;
    }
    Ok(DescendantSet {
        source: r.clone(),
        rules,
        alphabet: alphabet.clone(),
        members,
        delta,
    })
}

/// x1·∂r/∂x1 + … + xn·∂r/∂xn (+ ε if r is nullable), right-nested.
pub fn expand(r: &Regex, alphabet: &Alphabet) -> Regex {
    let mut items: Vec<Regex> = alphabet
        .symbols()
        .iter()
        .map(|&x| Regex::seq(Regex::Sym(x), deriv(r, x)))
        .collect();
    if nullable(r) {
        items.push(Regex::Eps);
    }
    Regex::alt_all(items)
}
