//! Regular expression syntax, semantic predicates, canonical similarity
//! representatives, and the set-semantics language oracle.
//!
//! The oracle [`lang_upto`] computes languages by direct set operations and
//! never consults derivatives, so it can be used to check everything else.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type Symbol = char;

/// A word over the alphabet; the empty string is ε.
pub type Word = String;

/// Returns true for characters usable as alphabet symbols (`[a-z0-9]`).
pub fn is_symbol(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Phi,
    Eps,
    Sym(Symbol),
    Alt(Box<Regex>, Box<Regex>),
    Seq(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn sym(x: Symbol) -> Regex {
        Regex::Sym(x)
    }

    pub fn alt(a: Regex, b: Regex) -> Regex {
        Regex::Alt(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Regex, b: Regex) -> Regex {
        Regex::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex) -> Regex {
        Regex::Star(Box::new(a))
    }

    /// Right-nested sum of `items`; φ when empty.
    pub fn alt_all(items: Vec<Regex>) -> Regex {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Regex::Phi,
            Some(last) => it.fold(last, |acc, r| Regex::alt(r, acc)),
        }
    }

    /// Right-nested concatenation of `items`; ε when empty.
    pub fn seq_all(items: Vec<Regex>) -> Regex {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Regex::Eps,
            Some(last) => it.fold(last, |acc, r| Regex::seq(r, acc)),
        }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Regex::Phi | Regex::Eps | Regex::Sym(_) => 1,
            Regex::Alt(a, b) | Regex::Seq(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) => 1 + a.size(),
        }
    }

    /// Symbols occurring in the expression, in alphabet order.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Regex::Phi | Regex::Eps => {}
            Regex::Sym(x) => {
                out.insert(*x);
            }
            Regex::Alt(a, b) | Regex::Seq(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Regex::Star(a) => a.collect_symbols(out),
        }
    }

    /// Leftmost symbol leaf, if any.
    pub fn first_symbol(&self) -> Option<Symbol> {
        match self {
            Regex::Phi | Regex::Eps => None,
            Regex::Sym(x) => Some(*x),
            Regex::Alt(a, b) | Regex::Seq(a, b) => a.first_symbol().or_else(|| b.first_symbol()),
            Regex::Star(a) => a.first_symbol(),
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text_of_regex(self))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("invalid symbol {0:?}; symbols are single characters in [a-z0-9]")]
    InvalidSymbol(char),
}

/// A nonempty, totally ordered set of symbols (ordered by character code).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<Symbol>);

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Result<Alphabet, AlphabetError> {
        let mut v: Vec<Symbol> = Vec::new();
        for c in symbols {
            if !is_symbol(c) {
                return Err(AlphabetError::InvalidSymbol(c));
            }
            v.push(c);
        }
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(AlphabetError::Empty);
        }
        Ok(Alphabet(v))
    }

    /// The symbols used by `regexes`; `{x}` if they use none.
    pub fn infer<'a>(regexes: impl IntoIterator<Item = &'a Regex>) -> Alphabet {
        let mut all = BTreeSet::new();
        for r in regexes {
            all.extend(r.symbols());
        }
        if all.is_empty() {
            all.insert('x');
        }
        Alphabet(all.into_iter().collect())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: Symbol) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        Alphabet(v)
    }

    /// All words of length at most `max_len`, shortest first.
    pub fn words_upto(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![String::new()];
        let mut layer = vec![String::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * self.0.len());
            for w in &layer {
                for &x in &self.0 {
                    let mut u = w.clone();
                    u.push(x);
                    next.push(u);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Idempotency,
    Commutativity,
    Associativity,
    Elim1,
    Elim2,
    Elim3,
    Elim4,
}

impl Rule {
    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of similarity rules used by [`simp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SimilarityRules(u8);

impl SimilarityRules {
    /// Idempotency, commutativity and associativity of `+`.
    pub const BASIC: SimilarityRules = SimilarityRules(0b000_0111);
    /// BASIC plus the four elimination rules.
    pub const FULL: SimilarityRules = SimilarityRules(0b111_1111);

    pub fn empty() -> SimilarityRules {
        SimilarityRules(0)
    }

    pub fn with(self, rule: Rule) -> SimilarityRules {
        SimilarityRules(self.0 | rule.bit())
    }

    pub fn contains(self, rule: Rule) -> bool {
        self.0 & rule.bit() != 0
    }

    pub fn is_subset(self, other: SimilarityRules) -> bool {
        self.0 & !other.0 == 0
    }
}

/// ε ∈ L(r).
pub fn nullable(r: &Regex) -> bool {
    match r {
        Regex::Phi | Regex::Sym(_) => false,
        Regex::Eps | Regex::Star(_) => true,
        Regex::Alt(a, b) => nullable(a) || nullable(b),
        Regex::Seq(a, b) => nullable(a) && nullable(b),
    }
}

/// L(r) = ∅.
pub fn is_empty_lang(r: &Regex) -> bool {
    match r {
        Regex::Phi => true,
        Regex::Eps | Regex::Sym(_) | Regex::Star(_) => false,
        Regex::Alt(a, b) => is_empty_lang(a) && is_empty_lang(b),
        Regex::Seq(a, b) => is_empty_lang(a) || is_empty_lang(b),
    }
}

/// Number of symbol leaves.
pub fn alphabetic_width(r: &Regex) -> usize {
    match r {
        Regex::Phi | Regex::Eps => 0,
        Regex::Sym(_) => 1,
        Regex::Alt(a, b) | Regex::Seq(a, b) => alphabetic_width(a) + alphabetic_width(b),
        Regex::Star(a) => alphabetic_width(a),
    }
}

/// Concatenates every pair of words from `a` and `b` whose total length is
/// at most `max_len`.
pub fn concat_upto(a: &BTreeSet<Word>, b: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut by_len: Vec<Vec<&Word>> = vec![Vec::new(); max_len + 1];
    for v in b {
        if v.len() <= max_len {
            by_len[v.len()].push(v);
        }
    }
    let mut out = BTreeSet::new();
    for u in a {
        if u.len() > max_len {
            continue;
        }
        for bucket in &by_len[..=max_len - u.len()] {
            for v in bucket {
                let mut w = String::with_capacity(u.len() + v.len());
                w.push_str(u);
                w.push_str(v);
                out.insert(w);
            }
        }
    }
    out
}

/// L(r) ∩ Σ^{≤max_len}, computed by direct set semantics.
pub fn lang_upto(r: &Regex, max_len: usize) -> BTreeSet<Word> {
    match r {
        Regex::Phi => BTreeSet::new(),
        Regex::Eps => BTreeSet::from([String::new()]),
        Regex::Sym(x) => {
            if max_len >= 1 {
                BTreeSet::from([x.to_string()])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Alt(a, b) => {
            let mut s = lang_upto(a, max_len);
            s.extend(lang_upto(b, max_len));
            s
        }
        Regex::Seq(a, b) => {
            let la = lang_upto(a, max_len);
            if la.is_empty() {
                return la;
            }
            concat_upto(&la, &lang_upto(b, max_len), max_len)
        }
        Regex::Star(a) => star_upto(&lang_upto(a, max_len), max_len),
    }
}

/// Kleene closure of `base` restricted to words of length at most `max_len`.
pub fn star_upto(base: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut acc = BTreeSet::from([String::new()]);
    let mut frontier = acc.clone();
    while !frontier.is_empty() {
        let next = concat_upto(&frontier, base, max_len);
        frontier = next.into_iter().filter(|w| !acc.contains(w)).collect();
        acc.extend(frontier.iter().cloned());
    }
    acc
}

/// Canonical representative of `r` under `rules`.
pub fn simp(r: &Regex, rules: SimilarityRules) -> Regex {
    match r {
        Regex::Phi | Regex::Eps | Regex::Sym(_) => r.clone(),
        Regex::Star(a) => Regex::star(simp(a, rules)),
        Regex::Seq(a, b) => simp_seq(simp(a, rules), simp(b, rules), rules),
        Regex::Alt(a, b) => simp_alt(simp(a, rules), simp(b, rules), rules),
    }
}

fn simp_seq(a: Regex, b: Regex, rules: SimilarityRules) -> Regex {
    if rules.contains(Rule::Elim2) && a == Regex::Phi {
        return Regex::Phi;
    }
    if rules.contains(Rule::Elim1) && a == Regex::Eps {
        return b;
    }
    match a {
        Regex::Seq(a1, a2) => Regex::Seq(a1, Box::new(simp_seq(*a2, b, rules))),
        a => Regex::seq(a, b),
    }
}

fn simp_alt(a: Regex, b: Regex, rules: SimilarityRules) -> Regex {
    let elim = rules.contains(Rule::Elim3) || rules.contains(Rule::Elim4);
    if !rules.contains(Rule::Associativity) {
        if rules.contains(Rule::Idempotency) && a == b {
            return a;
        }
        if rules.contains(Rule::Elim3) && a == Regex::Phi {
            return b;
        }
        if rules.contains(Rule::Elim4) && b == Regex::Phi {
            return a;
        }
        if rules.contains(Rule::Commutativity) && alt_key(&b) < alt_key(&a) {
            return Regex::alt(b, a);
        }
        return Regex::alt(a, b);
    }
    let mut items = Vec::new();
    flatten_alt(a, &mut items);
    flatten_alt(b, &mut items);
    if elim && items.len() > 1 {
        items.retain(|r| *r != Regex::Phi);
        if items.is_empty() {
            items.push(Regex::Phi);
        }
    }
    if rules.contains(Rule::Commutativity) {
        items.sort_by_cached_key(alt_key);
    }
    if rules.contains(Rule::Idempotency) {
        let mut seen = Vec::with_capacity(items.len());
        for r in items {
            if !seen.contains(&r) {
                seen.push(r);
            }
        }
        items = seen;
    }
    Regex::alt_all(items)
}

fn flatten_alt(r: Regex, out: &mut Vec<Regex>) {
    match r {
        Regex::Alt(a, b) => {
            flatten_alt(*a, out);
            flatten_alt(*b, out);
        }
        r => out.push(r),
    }
}

/// Sort key for alternatives: width, leftmost symbol (none first), then text.
pub fn alt_key(r: &Regex) -> (usize, Option<Symbol>, String) {
    (alphabetic_width(r), r.first_symbol(), text_of_regex(r))
}

/// True iff every concatenation in `r` is right-associated.
pub fn is_right_assoc(r: &Regex) -> bool {
    match r {
        Regex::Phi | Regex::Eps | Regex::Sym(_) => true,
        Regex::Seq(a, b) => !matches!(**a, Regex::Seq(..)) && is_right_assoc(a) && is_right_assoc(b),
        Regex::Alt(a, b) => is_right_assoc(a) && is_right_assoc(b),
        Regex::Star(a) => is_right_assoc(a),
    }
}

/// Re-associates every concatenation chain to the right without any other change.
pub fn right_assoc(r: &Regex) -> Regex {
    match r {
        Regex::Phi | Regex::Eps | Regex::Sym(_) => r.clone(),
        Regex::Star(a) => Regex::star(right_assoc(a)),
        Regex::Alt(a, b) => Regex::alt(right_assoc(a), right_assoc(b)),
        Regex::Seq(..) => {
            let mut parts = Vec::new();
            seq_parts(r, &mut parts);
            Regex::seq_all(parts.into_iter().map(right_assoc).collect())
        }
    }
}

fn seq_parts<'a>(r: &'a Regex, out: &mut Vec<&'a Regex>) {
    match r {
        Regex::Seq(a, b) => {
            seq_parts(a, out);
            seq_parts(b, out);
        }
        r => out.push(r),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(pos: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { pos, msg: msg.into() }
    }
}

/// Parses the ASCII regex grammar: `+` for alternation, juxtaposition for
/// concatenation, postfix `*`, `~` for ε, `!` for φ, symbols `[a-z0-9]`.
pub fn regex_of_text(text: &str) -> Result<Regex, SyntaxError> {
    let mut p = Parser::new(text);
    let r = p.expr()?;
    match p.peek() {
        None => Ok(r),
        Some((pos, c)) => Err(SyntaxError::new(pos, format!("unexpected {c:?}"))),
    }
}

struct Parser {
    toks: Vec<(usize, char)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Parser {
        let toks: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        Parser {
            toks,
            at: 0,
            end: text.len(),
        }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.toks.get(self.at).copied()
    }

    fn expr(&mut self) -> Result<Regex, SyntaxError> {
        let first = self.term()?;
        if let Some((_, '+')) = self.peek() {
            self.at += 1;
            let rest = self.expr()?;
            return Ok(Regex::alt(first, rest));
        }
        Ok(first)
    }

    fn term(&mut self) -> Result<Regex, SyntaxError> {
        let mut factors = vec![self.factor()?];
        while let Some((_, c)) = self.peek() {
            if c == '+' || c == ')' {
                break;
            }
            factors.push(self.factor()?);
        }
        Ok(Regex::seq_all(factors))
    }

    fn factor(&mut self) -> Result<Regex, SyntaxError> {
        let mut r = self.base()?;
        while let Some((_, '*')) = self.peek() {
            self.at += 1;
            r = Regex::star(r);
        }
        Ok(r)
    }

    fn base(&mut self) -> Result<Regex, SyntaxError> {
        let Some((pos, c)) = self.peek() else {
            return Err(SyntaxError::new(self.end, "unexpected end of input"));
        };
        self.at += 1;
        match c {
            '~' => Ok(Regex::Eps),
            '!' => Ok(Regex::Phi),
            '(' => {
                let r = self.expr()?;
                match self.peek() {
                    Some((_, ')')) => {
                        self.at += 1;
                        Ok(r)
                    }
                    Some((p, d)) => Err(SyntaxError::new(p, format!("expected ')' but found {d:?}"))),
                    None => Err(SyntaxError::new(self.end, "missing ')'")),
                }
            }
            c if is_symbol(c) => Ok(Regex::Sym(c)),
            c => Err(SyntaxError::new(pos, format!("unexpected {c:?}"))),
        }
    }
}

/// Prints `r` in the grammar accepted by [`regex_of_text`]; the output
/// parses back to a structurally equal expression.
pub fn text_of_regex(r: &Regex) -> String {
    let mut s = String::new();
    write_regex(r, &mut s);
    s
}

fn write_regex(r: &Regex, out: &mut String) {
    match r {
        Regex::Phi => out.push('!'),
        Regex::Eps => out.push('~'),
        Regex::Sym(x) => out.push(*x),
        Regex::Alt(a, b) => {
            write_wrapped(a, matches!(**a, Regex::Alt(..)), out);
            out.push('+');
            write_regex(b, out);
        }
        Regex::Seq(a, b) => {
            write_wrapped(a, matches!(**a, Regex::Alt(..) | Regex::Seq(..)), out);
            write_wrapped(b, matches!(**b, Regex::Alt(..)), out);
        }
        Regex::Star(a) => {
            write_wrapped(a, matches!(**a, Regex::Alt(..) | Regex::Seq(..)), out);
            out.push('*');
        }
    }
}

fn write_wrapped(r: &Regex, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        write_regex(r, out);
        out.push(')');
    } else {
        write_regex(r, out);
    }
}

/// Shorthand used throughout the crate and its tests; panics on bad input.
pub fn re(text: &str) -> Regex {
    regex_of_text(text).unwrap_or_else(|e| panic!("bad regex {text:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullable_examples() {
        assert!(nullable(&Regex::Eps));
        assert!(nullable(&re("x*")));
        assert!(!nullable(&re("x y*")));
    }

    #[test]
    fn emptiness_examples() {
        assert!(is_empty_lang(&Regex::Phi));
        assert!(is_empty_lang(&re("! x + !")));
        assert!(!is_empty_lang(&re("!*")));
    }

    #[test]
    fn width_examples() {
        assert_eq!(alphabetic_width(&Regex::Phi), 0);
        assert_eq!(alphabetic_width(&re("x x* + y")), 3);
        assert_eq!(alphabetic_width(&re("(x+y)*(x+y)*")), 4);
    }

    fn words(ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(lang_upto(&re("x*"), 2), words(&["", "x", "xx"]));
        assert_eq!(lang_upto(&re("(x+y)*"), 1), words(&["", "x", "y"]));
        assert_eq!(lang_upto(&re("x y + x"), 2), words(&["x", "xy"]));
        assert_eq!(lang_upto(&re("!*"), 3), words(&[""]));
        assert_eq!(lang_upto(&re("x"), 0), words(&[]));
    }

    #[test]
    fn simp_examples() {
        assert_eq!(simp(&re("(~+!)(x+y)*"), SimilarityRules::FULL), re("(x+y)*"));
        assert_eq!(simp(&re("x+x"), SimilarityRules::BASIC), re("x"));
        let yx = re("y+x");
        let s = simp(&yx, SimilarityRules::BASIC);
        assert_eq!(s, re("x+y"));
        assert_eq!(lang_upto(&s, 4), lang_upto(&yx, 4));
    }

    #[test]
    fn simp_basic_keeps_eliminable_parts() {
        assert_eq!(simp(&re("(~+!)x"), SimilarityRules::BASIC), re("(!+~)x"));
        assert_eq!(simp(&re("(x y) z"), SimilarityRules::BASIC), re("x y z"));
    }

    #[test]
    fn alternatives_sort_phi_eps_then_symbols() {
        let r = simp(&re("y + ~ + x x + ! + x"), SimilarityRules::BASIC);
        assert_eq!(r, re("! + ~ + x + y + x x"));
    }

    #[test]
    fn parser_examples() {
        assert!(regex_of_text("x*(yR?)").is_err());
        assert_eq!(
            regex_of_text("x y + ~").unwrap(),
            Regex::alt(Regex::seq(Regex::sym('x'), Regex::sym('y')), Regex::Eps)
        );
        assert_eq!(regex_of_text("!*").unwrap(), Regex::star(Regex::Phi));
    }

    #[test]
    fn parser_errors_carry_positions() {
        let e = regex_of_text("x + ").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = regex_of_text("(x y").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = regex_of_text("x)").unwrap_err();
        assert_eq!(e.pos, 1);
        assert!(regex_of_text("").is_err());
        assert!(regex_of_text("X").is_err());
    }

    #[test]
    fn printing_round_trips_nested_shapes() {
        for r in [
            Regex::alt(Regex::alt(re("x"), re("y")), re("z")),
            Regex::seq(Regex::seq(re("x"), re("y")), re("z")),
            Regex::star(Regex::star(re("x"))),
            Regex::seq(re("x+y"), re("z*")),
            re("(x y)* + ~ !"),
        ] {
            assert_eq!(regex_of_text(&text_of_regex(&r)).unwrap(), r);
        }
    }

    #[test]
    fn alphabet_validation() {
        assert_eq!(Alphabet::new([]).unwrap_err(), AlphabetError::Empty);
        assert_eq!(Alphabet::new(['X']).unwrap_err(), AlphabetError::InvalidSymbol('X'));
        let a = Alphabet::new(['y', 'x', 'y']).unwrap();
        assert_eq!(a.symbols(), &['x', 'y']);
        assert_eq!(a.words_upto(2).len(), 7);
        assert_eq!(Alphabet::infer([&Regex::Phi]).symbols(), &['x']);
    }
}
