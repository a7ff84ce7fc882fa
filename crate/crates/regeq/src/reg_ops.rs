//! Subtraction, intersection and shuffle of regular expressions by solving
//! equation systems over pairs of canonical descendants.

use std::collections::{BTreeSet, VecDeque};

use crate::automata::grouped_rhs;
use crate::derivatives::{descendants, DerivError, DescendantSet};
use crate::equations::{solve, EquationError, EquationSystem, NormalRhs, Strategy, Var};
use crate::regex_core::{is_empty_lang, nullable, Alphabet, Regex, SimilarityRules};

/// Word shuffle: every interleaving of `v` and `w`.
pub fn shuffle_words(v: &str, w: &str) -> BTreeSet<String> {
    fn go(v: &[char], w: &[char], prefix: &mut String, out: &mut BTreeSet<String>) {
        match (v.split_first(), w.split_first()) {
            (None, _) => {
                out.insert(format!("{prefix}{}", w.iter().collect::<String>()));
            }
            (_, None) => {
                out.insert(format!("{prefix}{}", v.iter().collect::<String>()));
            }
            (Some((&x, v2)), Some((&y, w2))) => {
                prefix.push(x);
                go(v2, w, prefix, out);
                prefix.pop();
                prefix.push(y);
                go(v, w2, prefix, out);
                prefix.pop();
            }
        }
    }
    let (v, w): (Vec<char>, Vec<char>) = (v.chars().collect(), w.chars().collect());
    let mut out = BTreeSet::new();
    go(&v, &w, &mut String::new(), &mut out);
    out
}

/// Shuffle of two finite languages.
pub fn shuffle_langs(a: &BTreeSet<String>, b: &BTreeSet<String>) -> BTreeSet<String> {
    a.iter()
        .flat_map(|v| b.iter().flat_map(move |w| shuffle_words(v, w)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ProductMode {
    #[default]
    FullProduct,
    ReachableOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairOp {
    Subtract,
    Intersect,
    Shuffle,
}

/// A variable standing for the pair `(left, right)` of descendants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairVar {
    pub var: Var,
    pub left: Regex,
    pub right: Regex,
}

#[derive(Clone, Debug)]
pub struct ProductSystem {
    pub system: EquationSystem,
    pub pairs: Vec<PairVar>,
    /// The variable of `(simp r, simp s)`.
    pub start: Var,
}

#[derive(Clone, Debug)]
pub struct ProductConfig {
    pub rules: SimilarityRules,
    pub mode: ProductMode,
    /// Defaults to the symbols of both operands.
    pub alphabet: Option<Alphabet>,
}

impl Default for ProductConfig {
    fn default() -> Self {
        ProductConfig {
            rules: SimilarityRules::FULL,
            mode: ProductMode::FullProduct,
            alphabet: None,
        }
    }
}

impl ProductConfig {
    pub fn with_mode(mode: ProductMode) -> Self {
        ProductConfig {
            mode,
            ..Default::default()
        }
    }
}

struct Product {
    dr: DescendantSet,
    ds: DescendantSet,
}

impl Product {
    fn id(&self, i: usize, j: usize) -> usize {
        i * self.ds.len() + j
    }

    fn var(&self, i: usize, j: usize) -> Var {
        Var::numbered(self.id(i, j) + 1)
    }

    /// `(target pair, symbol index)` moves out of `(i, j)`.
    fn moves(&self, op: PairOp, i: usize, j: usize) -> Vec<(usize, usize, usize)> {
        let r = &self.dr.members[i];
        if is_empty_lang(r) || (op == PairOp::Intersect && is_empty_lang(&self.ds.members[j])) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for k in 0..self.dr.alphabet.len() {
            let (ri, sj) = (self.dr.delta[i][k], self.ds.delta[j][k]);
            match op {
                PairOp::Subtract | PairOp::Intersect => out.push((ri, sj, k)),
                PairOp::Shuffle => {
                    out.push((ri, j, k));
                    out.push((i, sj, k));
                }
            }
        }
        out
    }

    fn tail(&self, op: PairOp, i: usize, j: usize) -> Regex {
        let (r, s) = (&self.dr.members[i], &self.ds.members[j]);
        if is_empty_lang(r) || (op == PairOp::Intersect && is_empty_lang(s)) {
            return Regex::Phi;
        }
        match op {
            PairOp::Subtract => flag(nullable(r) && !nullable(s)),
            PairOp::Intersect => flag(nullable(r) && nullable(s)),
            PairOp::Shuffle => {
                let t1 = if nullable(r) { s.clone() } else { Regex::Phi };
                let t2 = if nullable(s) { r.clone() } else { Regex::Phi };
                Regex::alt(t1, t2)
            }
        }
    }
}

fn flag(b: bool) -> Regex {
    if b {
        Regex::Eps
    } else {
        Regex::Phi
    }
}

/// The equation system for `op` over `D(r) × D(s)` (or its part reachable
/// from the start pair).
pub fn product_equations(op: PairOp, r: &Regex, s: &Regex, cfg: &ProductConfig) -> Result<ProductSystem, DerivError> {
    let alphabet = cfg.alphabet.clone().unwrap_or_else(|| Alphabet::infer([r, s]));
    let p = Product {
        dr: descendants(r, &alphabet, cfg.rules)?,
        ds: descendants(s, &alphabet, cfg.rules)?,
    };
    let (nr, ns) = (p.dr.len(), p.ds.len());
    let included: Vec<(usize, usize)> = match cfg.mode {
        ProductMode::FullProduct => (0..nr).flat_map(|i| (0..ns).map(move |j| (i, j))).collect(),
        ProductMode::ReachableOnly => {
            let mut seen = vec![false; nr * ns];
            seen[0] = true;
            let mut queue = VecDeque::from([(0, 0)]);
            let mut order = Vec::new();
            while let Some((i, j)) = queue.pop_front() {
                order.push((i, j));
                for (a, b, _) in p.moves(op, i, j) {
                    if !seen[p.id(a, b)] {
                        seen[p.id(a, b)] = true;
                        queue.push_back((a, b));
                    }
                }
            }
            order.sort();
            order
        }
    };
    let all_vars: Vec<Var> = (0..nr * ns).map(|k| Var::numbered(k + 1)).collect();
    let syms = alphabet.symbols();
    let mut eqs: Vec<(Var, NormalRhs)> = Vec::with_capacity(included.len());
    let mut pairs = Vec::with_capacity(included.len());
    for &(i, j) in &included {
        let moves: Vec<(Regex, usize)> = p
            .moves(op, i, j)
            .into_iter()
            .map(|(a, b, k)| (Regex::Sym(syms[k]), p.id(a, b)))
            .collect();
        eqs.push((
            p.var(i, j),
            grouped_rhs(p.id(i, j), &moves, &all_vars, p.tail(op, i, j)),
        ));
        pairs.push(PairVar {
            var: p.var(i, j),
            left: p.dr.members[i].clone(),
            right: p.ds.members[j].clone(),
        });
    }
    let system = EquationSystem::new(alphabet, eqs).expect("product equations are well formed");
    Ok(ProductSystem {
        system,
        pairs,
        start: p.var(0, 0),
    })
}

pub fn subtract_equations(r: &Regex, s: &Regex, mode: ProductMode) -> Result<ProductSystem, DerivError> {
    product_equations(PairOp::Subtract, r, s, &ProductConfig::with_mode(mode))
}

pub fn intersect_equations(r: &Regex, s: &Regex, mode: ProductMode) -> Result<ProductSystem, DerivError> {
    product_equations(PairOp::Intersect, r, s, &ProductConfig::with_mode(mode))
}

pub fn shuffle_equations(r: &Regex, s: &Regex, mode: ProductMode) -> Result<ProductSystem, DerivError> {
    product_equations(PairOp::Shuffle, r, s, &ProductConfig::with_mode(mode))
}

#[derive(Debug, thiserror::Error)]
pub enum OpError {
    #[error(transparent)]
    Deriv(#[from] DerivError),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// Solves the product system and returns the start pair's component.
pub fn apply_op(op: PairOp, r: &Regex, s: &Regex, strategy: Strategy, cfg: &ProductConfig) -> Result<Regex, OpError> {
    let ps = product_equations(op, r, s, cfg)?;
    let sol = solve(&ps.system, strategy)?;
    Ok(sol.get(&ps.start).cloned().expect("start pair solved"))
}

pub fn subtract(r: &Regex, s: &Regex, strategy: Strategy, mode: ProductMode) -> Result<Regex, OpError> {
    apply_op(PairOp::Subtract, r, s, strategy, &ProductConfig::with_mode(mode))
}

pub fn intersect(r: &Regex, s: &Regex, strategy: Strategy, mode: ProductMode) -> Result<Regex, OpError> {
    apply_op(PairOp::Intersect, r, s, strategy, &ProductConfig::with_mode(mode))
}

pub fn shuffle(r: &Regex, s: &Regex, strategy: Strategy, mode: ProductMode) -> Result<Regex, OpError> {
    apply_op(PairOp::Shuffle, r, s, strategy, &ProductConfig::with_mode(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_trees::is_non_overlapping;
    use crate::regex_core::{lang_upto, re};

    fn set(ws: &[&str]) -> BTreeSet<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn shuffle_word_examples() {
        assert_eq!(shuffle_words("xy", "z"), set(&["xyz", "xzy", "zxy"]));
        assert_eq!(shuffle_words("", "xy"), set(&["xy"]));
        assert_eq!(shuffle_words("x", "y"), set(&["xy", "yx"]));
        assert_eq!(shuffle_words("xx", "xx"), set(&["xxxx"]));
    }

    #[test]
    fn subtraction_system_shape() {
        let ps = subtract_equations(&re("(x+y)*"), &re("(x x)*"), ProductMode::FullProduct).unwrap();
        assert_eq!(
            ps.system.to_text(),
            "R1 = x R2 + y R3 + !\nR2 = x R1 + y R3 + ~\nR3 = (x+y) R3 + ~\n"
        );
        assert!(is_non_overlapping(&ps.system));
        assert_eq!(ps.pairs[2].right, Regex::Phi);
    }

    #[test]
    fn subtraction_examples() {
        for mode in [ProductMode::FullProduct, ProductMode::ReachableOnly] {
            let d = subtract(&re("x* y*"), &re("x*"), Strategy::Default, mode).unwrap();
            assert_eq!(lang_upto(&d, 7), lang_upto(&re("x* y y*"), 7));
            let d = subtract(&re("(x+y)*"), &re("(x x)*"), Strategy::Default, mode).unwrap();
            let expected = re("(x x)* (x y (x+y)* + x + y (x+y)*)");
            assert_eq!(lang_upto(&d, 7), lang_upto(&expected, 7));
        }
        let r = re("x (y + x)*");
        let d = subtract(&r, &Regex::Phi, Strategy::Default, ProductMode::FullProduct).unwrap();
        assert_eq!(lang_upto(&d, 5), lang_upto(&r, 5));
        let d = subtract(&r, &r, Strategy::Default, ProductMode::FullProduct).unwrap();
        assert!(lang_upto(&d, 5).is_empty());
        let ps = subtract_equations(&Regex::Phi, &r, ProductMode::FullProduct).unwrap();
        assert!(ps
            .system
            .equations()
            .iter()
            .all(|e| e.rhs == NormalRhs::pure(Regex::Phi)));
    }

    #[test]
    fn descendant_counts_fix_system_size() {
        let cfg = |rules| ProductConfig {
            rules,
            ..Default::default()
        };
        let full = product_equations(PairOp::Subtract, &re("x* y*"), &re("x*"), &cfg(SimilarityRules::FULL)).unwrap();
        assert_eq!(full.system.len(), 6);
        let basic = product_equations(PairOp::Subtract, &re("x* y*"), &re("x*"), &cfg(SimilarityRules::BASIC)).unwrap();
        assert_eq!(basic.system.len(), 24);
    }

    #[test]
    fn intersection_examples() {
        let i = intersect(
            &re("(x+y)*"),
            &re("(x x)*"),
            Strategy::Default,
            ProductMode::FullProduct,
        )
        .unwrap();
        assert_eq!(lang_upto(&i, 8), lang_upto(&re("(x x)*"), 8));
        let i = intersect(&re("x y*"), &Regex::Phi, Strategy::Default, ProductMode::FullProduct).unwrap();
        assert!(lang_upto(&i, 5).is_empty());
        let i = intersect(&re("x"), &re("y"), Strategy::Default, ProductMode::ReachableOnly).unwrap();
        assert!(lang_upto(&i, 5).is_empty());
        let ps = intersect_equations(&re("(x+y)*"), &re("x*"), ProductMode::FullProduct).unwrap();
        assert!(is_non_overlapping(&ps.system));
    }

    #[test]
    fn shuffle_examples() {
        let s = shuffle(&re("x"), &re("y"), Strategy::Default, ProductMode::FullProduct).unwrap();
        assert_eq!(lang_upto(&s, 4), lang_upto(&re("x y + y x"), 4));
        let r = re("x y*");
        let s = shuffle(&r, &Regex::Eps, Strategy::Default, ProductMode::ReachableOnly).unwrap();
        assert_eq!(lang_upto(&s, 5), lang_upto(&r, 5));
        let s = shuffle(&re("x*"), &re("y"), Strategy::Default, ProductMode::FullProduct).unwrap();
        let oracle: BTreeSet<String> = shuffle_langs(&lang_upto(&re("x*"), 5), &lang_upto(&re("y"), 5))
            .into_iter()
            .filter(|w| w.len() <= 5)
            .collect();
        assert_eq!(lang_upto(&s, 5), oracle);
        let ps = shuffle_equations(&re("x"), &re("x"), ProductMode::FullProduct).unwrap();
        assert!(!is_non_overlapping(&ps.system));
    }
}
