//! Regular equation systems, the E1–E7 normalization engine, the Arden/Subst
//! solver, and solving-order strategies.
//!
//! Right-hand sides are manipulated as [`Gamma`] terms: regular expressions
//! that may mention variables. Every variable-free subterm is kept collapsed
//! into a single [`Gamma::Re`] leaf, so structural equality is meaningful.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::regex_core::{alphabetic_width, lang_upto, regex_of_text, text_of_regex, Alphabet, Regex, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub index: usize,
    pub name: String,
}

impl Var {
    pub fn new(name: impl Into<String>, index: usize) -> Var {
        Var {
            index,
            name: name.into(),
        }
    }

    /// `R{index}`.
    pub fn numbered(index: usize) -> Var {
        Var::new(format!("R{index}"), index)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Checks the `[A-Z][A-Za-z0-9]*` shape of variable names.
pub fn is_var_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_uppercase()) && cs.all(|c| c.is_ascii_alphanumeric())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquationError {
    #[error("duplicate left-hand side {0}")]
    DuplicateLhs(String),
    #[error("variable {0} occurs on a right-hand side but has no equation")]
    UndefinedVar(String),
    #[error("no equation for {0}")]
    UnknownVar(String),
    #[error("equation for {0} still has a self term")]
    SelfTermPresent(String),
    #[error("equation for {0} has no self term")]
    NoSelfTerm(String),
    #[error("right-hand side is not right-linear: {0}")]
    NotRightLinear(String),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: {err}")]
    Syntax { line: usize, err: SyntaxError },
}

/// A right-hand side as written: `r·R | r | α + α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rhs {
    Coef(Regex, Var),
    Pure(Regex),
    Sum(Box<Rhs>, Box<Rhs>),
}

impl Rhs {
    pub fn sum(a: Rhs, b: Rhs) -> Rhs {
        Rhs::Sum(Box::new(a), Box::new(b))
    }

    /// Right-nested sum of the given summands.
    pub fn sum_all(items: Vec<Rhs>) -> Rhs {
        let mut it = items.into_iter().rev();
        let last = it.next().unwrap_or(Rhs::Pure(Regex::Phi));
        it.fold(last, |acc, r| Rhs::sum(r, acc))
    }

    pub fn to_gamma(&self) -> Gamma {
        match self {
            Rhs::Coef(r, v) => Gamma::seq(Gamma::Re(r.clone()), Gamma::Var(v.clone())),
            Rhs::Pure(r) => Gamma::Re(r.clone()),
            Rhs::Sum(a, b) => Gamma::alt(a.to_gamma(), b.to_gamma()),
        }
    }
}

/// An expression over regexes and variables (the γ of the typing judgment).
///
/// Build values with [`Gamma::seq`] and [`Gamma::alt`]; they keep every
/// variable-free subterm collapsed into one `Re` leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gamma {
    Re(Regex),
    Var(Var),
    Seq(Box<Gamma>, Box<Gamma>),
    Alt(Box<Gamma>, Box<Gamma>),
}

impl From<Regex> for Gamma {
    fn from(r: Regex) -> Gamma {
        Gamma::Re(r)
    }
}

impl From<Var> for Gamma {
    fn from(v: Var) -> Gamma {
        Gamma::Var(v)
    }
}

impl From<&Rhs> for Gamma {
    fn from(r: &Rhs) -> Gamma {
        r.to_gamma()
    }
}

impl Gamma {
    pub fn seq(a: Gamma, b: Gamma) -> Gamma {
        match (a, b) {
            (Gamma::Re(x), Gamma::Re(y)) => Gamma::Re(Regex::seq(x, y)),
            (a, b) => Gamma::Seq(Box::new(a), Box::new(b)),
        }
    }

    pub fn alt(a: Gamma, b: Gamma) -> Gamma {
        match (a, b) {
            (Gamma::Re(x), Gamma::Re(y)) => Gamma::Re(Regex::alt(x, y)),
            (a, b) => Gamma::Alt(Box::new(a), Box::new(b)),
        }
    }

    /// Right-nested sum of `items`; φ when empty.
    pub fn alt_all(items: Vec<Gamma>) -> Gamma {
        let mut it = items.into_iter().rev();
        let last = it.next().unwrap_or(Gamma::Re(Regex::Phi));
        it.fold(last, |acc, g| Gamma::alt(g, acc))
    }

    /// Re-collapses variable-free subterms of a hand-built value.
    pub fn canonical(&self) -> Gamma {
        match self {
            Gamma::Re(_) | Gamma::Var(_) => self.clone(),
            Gamma::Seq(a, b) => Gamma::seq(a.canonical(), b.canonical()),
            Gamma::Alt(a, b) => Gamma::alt(a.canonical(), b.canonical()),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Gamma::Re(_))
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Gamma::Re(_) => false,
            Gamma::Var(w) => w == v,
            Gamma::Seq(a, b) | Gamma::Alt(a, b) => a.mentions(v) || b.mentions(v),
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Gamma::Re(_) => {}
            Gamma::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Gamma::Seq(a, b) | Gamma::Alt(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Number of variable occurrences.
    pub fn var_occurrences(&self) -> usize {
        match self {
            Gamma::Re(_) => 0,
            Gamma::Var(_) => 1,
            Gamma::Seq(a, b) | Gamma::Alt(a, b) => a.var_occurrences() + b.var_occurrences(),
        }
    }

    pub fn to_regex(&self) -> Option<Regex> {
        match self {
            Gamma::Re(r) => Some(r.clone()),
            Gamma::Var(_) => None,
            Gamma::Seq(a, b) => Some(Regex::seq(a.to_regex()?, b.to_regex()?)),
            Gamma::Alt(a, b) => Some(Regex::alt(a.to_regex()?, b.to_regex()?)),
        }
    }

    /// Replaces every occurrence of `v` by `by`.
    pub fn substitute(&self, v: &Var, by: &Gamma) -> Gamma {
        match self {
            Gamma::Re(_) => self.clone(),
            Gamma::Var(w) => {
                if w == v {
                    by.clone()
                } else {
                    self.clone()
                }
            }
            Gamma::Seq(a, b) => Gamma::seq(a.substitute(v, by), b.substitute(v, by)),
            Gamma::Alt(a, b) => Gamma::alt(a.substitute(v, by), b.substitute(v, by)),
        }
    }

    /// Instantiates every variable through `sol`; `None` if one is missing.
    pub fn instantiate(&self, sol: &Solution) -> Option<Regex> {
        match self {
            Gamma::Re(r) => Some(r.clone()),
            Gamma::Var(v) => sol.get(v).cloned(),
            Gamma::Seq(a, b) => Some(Regex::seq(a.instantiate(sol)?, b.instantiate(sol)?)),
            Gamma::Alt(a, b) => Some(Regex::alt(a.instantiate(sol)?, b.instantiate(sol)?)),
        }
    }

    /// Views `self` as a concatenation, splitting a collapsed leaf if needed.
    pub fn view_seq(&self) -> Option<(Gamma, Gamma)> {
        match self {
            Gamma::Seq(a, b) => Some(((**a).clone(), (**b).clone())),
            Gamma::Re(Regex::Seq(a, b)) => Some((Gamma::Re((**a).clone()), Gamma::Re((**b).clone()))),
            _ => None,
        }
    }

    /// Views `self` as a sum, splitting a collapsed leaf if needed.
    pub fn view_alt(&self) -> Option<(Gamma, Gamma)> {
        match self {
            Gamma::Alt(a, b) => Some(((**a).clone(), (**b).clone())),
            Gamma::Re(Regex::Alt(a, b)) => Some((Gamma::Re((**a).clone()), Gamma::Re((**b).clone()))),
            _ => None,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_gamma(self, &mut s);
        f.write_str(&s)
    }
}

#[derive(PartialEq, PartialOrd)]
enum Level {
    Alt,
    Seq,
    Atom,
}

fn level(g: &Gamma) -> Level {
    match g {
        Gamma::Alt(..) | Gamma::Re(Regex::Alt(..)) => Level::Alt,
        Gamma::Seq(..) | Gamma::Re(Regex::Seq(..)) => Level::Seq,
        _ => Level::Atom,
    }
}

fn write_gamma(g: &Gamma, out: &mut String) {
    let wrapped = |g: &Gamma, wrap: bool, out: &mut String| {
        if wrap {
            out.push('(');
            write_gamma(g, out);
            out.push(')');
        } else {
            write_gamma(g, out);
        }
    };
    match g {
        Gamma::Re(r) => out.push_str(&text_of_regex(r)),
        Gamma::Var(v) => out.push_str(&v.name),
        Gamma::Seq(a, b) => {
            wrapped(a, level(a) < Level::Atom, out);
            if matches!(**b, Gamma::Var(_)) {
                out.push(' ');
            }
            wrapped(b, level(b) == Level::Alt, out);
        }
        Gamma::Alt(a, b) => {
            wrapped(a, level(a) == Level::Alt, out);
            out.push_str(" + ");
            write_gamma(b, out);
        }
    }
}

/// A right-hand side in normal form: optional self term, pairwise distinct
/// variable terms, and a variable-free tail (φ when there is none).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalRhs {
    pub self_coef: Option<Regex>,
    pub pairs: Vec<(Regex, Var)>,
    pub tail: Regex,
}

impl NormalRhs {
    pub fn pure(tail: Regex) -> NormalRhs {
        NormalRhs {
            self_coef: None,
            pairs: Vec::new(),
            tail,
        }
    }

    /// Right-nested sum: self term, then the pairs in order, then the tail.
    pub fn render(&self, self_var: &Var) -> Gamma {
        let mut items = Vec::with_capacity(self.pairs.len() + 2);
        if let Some(s) = &self.self_coef {
            items.push(Gamma::seq(Gamma::Re(s.clone()), Gamma::Var(self_var.clone())));
        }
        items.extend(self.rest_items());
        Gamma::alt_all(items)
    }

    /// The rendering without the self term (the α of `R ≈ s·R + α`).
    pub fn render_rest(&self) -> Gamma {
        Gamma::alt_all(self.rest_items())
    }

    fn rest_items(&self) -> Vec<Gamma> {
        let mut items: Vec<Gamma> = self
            .pairs
            .iter()
            .map(|(c, v)| Gamma::seq(Gamma::Re(c.clone()), Gamma::Var(v.clone())))
            .collect();
        items.push(Gamma::Re(self.tail.clone()));
        items
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.pairs.iter().any(|(_, w)| w == v)
    }

    pub fn coef_of(&self, v: &Var) -> Option<&Regex> {
        self.pairs.iter().find(|(_, w)| w == v).map(|(c, _)| c)
    }

    fn check(&self, self_var: &Var) -> bool {
        let mut seen = BTreeSet::new();
        self.pairs.iter().all(|(_, v)| v != self_var && seen.insert(v.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub var: Var,
    pub rhs: NormalRhs,
    gamma: Gamma,
}

impl Equation {
    pub fn new(var: Var, rhs: NormalRhs) -> Equation {
        let gamma = rhs.render(&var);
        Equation { var, rhs, gamma }
    }

    /// The rendered right-hand side; parse trees of `var` unfold to this.
    pub fn gamma(&self) -> &Gamma {
        &self.gamma
    }
}

/// Lookup of a variable's right-hand side, used by typing and parsing.
pub trait RhsLookup {
    fn rhs_gamma(&self, v: &Var) -> Option<&Gamma>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    pub alphabet: Alphabet,
    eqs: Vec<Equation>,
}

impl RhsLookup for EquationSystem {
    fn rhs_gamma(&self, v: &Var) -> Option<&Gamma> {
        self.get(v).map(|e| &e.gamma)
    }
}

impl EquationSystem {
    /// Builds a system, checking distinct left-hand sides and that every
    /// right-hand variable has an equation.
    pub fn new(alphabet: Alphabet, eqs: Vec<(Var, NormalRhs)>) -> Result<EquationSystem, EquationError> {
        let mut lhs = BTreeSet::new();
        for (v, rhs) in &eqs {
            if !lhs.insert(v.clone()) {
                return Err(EquationError::DuplicateLhs(v.name.clone()));
            }
            if !rhs.check(v) {
                return Err(EquationError::NotRightLinear(format!(
                    "{v}: repeated or misplaced variable term"
                )));
            }
        }
        for (_, rhs) in &eqs {
            for (_, w) in &rhs.pairs {
                if !lhs.contains(w) {
                    return Err(EquationError::UndefinedVar(w.name.clone()));
                }
            }
        }
        Ok(EquationSystem {
            alphabet,
            eqs: eqs.into_iter().map(|(v, r)| Equation::new(v, r)).collect(),
        })
    }

    pub fn empty(alphabet: Alphabet) -> EquationSystem {
        EquationSystem {
            alphabet,
            eqs: Vec::new(),
        }
    }

    pub fn equations(&self) -> &[Equation] {
        &self.eqs
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn vars(&self) -> Vec<Var> {
        self.eqs.iter().map(|e| e.var.clone()).collect()
    }

    pub fn get(&self, v: &Var) -> Option<&Equation> {
        self.eqs.iter().find(|e| &e.var == v)
    }

    pub fn var_named(&self, name: &str) -> Option<&Var> {
        self.eqs.iter().map(|e| &e.var).find(|v| v.name == name)
    }

    /// The same equations in a different sequence order.
    pub fn permuted(&self, order: &[usize]) -> EquationSystem {
        EquationSystem {
            alphabet: self.alphabet.clone(),
            eqs: order.iter().map(|&i| self.eqs[i].clone()).collect(),
        }
    }

    /// Removes equations not reachable from `root` through variable occurrences.
    pub fn restrict_to_reachable(&self, root: &Var) -> EquationSystem {
        let mut keep = BTreeSet::from([root.clone()]);
        let mut stack = vec![root.clone()];
        while let Some(v) = stack.pop() {
            if let Some(e) = self.get(&v) {
                for (_, w) in &e.rhs.pairs {
                    if keep.insert(w.clone()) {
                        stack.push(w.clone());
                    }
                }
            }
        }
        EquationSystem {
            alphabet: self.alphabet.clone(),
            eqs: self.eqs.iter().filter(|e| keep.contains(&e.var)).cloned().collect(),
        }
    }

    /// One `VAR = rhs` line per equation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.eqs {
            s.push_str(&format!("{} = {}\n", e.var, e.gamma));
        }
        s
    }
}

/// Left-hand side, summands as (regex text, variable), line number.
type RawEquation = (String, Vec<(String, Option<String>)>, usize);

/// Parses the text format: one `VAR = SUMMAND (+ SUMMAND)*` per line, where a
/// summand is a regex optionally followed by a variable. Blank lines and lines
/// starting with `#` are skipped. Variables are indexed by order of definition.
pub fn parse_system(text: &str) -> Result<EquationSystem, EquationError> {
    let mut raw: Vec<RawEquation> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let Some((lhs, rhs)) = t.split_once('=') else {
            return Err(EquationError::Format {
                line: line_no,
                msg: "expected `VAR = ...`".into(),
            });
        };
        let lhs = lhs.trim();
        if !is_var_name(lhs) {
            return Err(EquationError::Format {
                line: line_no,
                msg: format!("bad variable name {lhs:?}"),
            });
        }
        let mut summands = Vec::new();
        for part in split_top_level(rhs) {
            summands.push(split_summand(part.trim()).map_err(|msg| EquationError::Format { line: line_no, msg })?);
        }
        raw.push((lhs.to_string(), summands, line_no));
    }
    let mut vars: HashMap<String, Var> = HashMap::new();
    for (i, (name, _, line)) in raw.iter().enumerate() {
        if vars.insert(name.clone(), Var::new(name.clone(), i + 1)).is_some() {
            return Err(EquationError::Format {
                line: *line,
                msg: format!("duplicate left-hand side {name}"),
            });
        }
    }
    let mut eqs = Vec::new();
    let mut regexes = Vec::new();
    for (name, summands, line) in &raw {
        let mut items = Vec::new();
        for (re_text, var) in summands {
            let r = if re_text.trim().is_empty() {
                if var.is_none() {
                    return Err(EquationError::Format {
                        line: *line,
                        msg: "empty summand".into(),
                    });
                }
                Regex::Eps
            } else {
                regex_of_text(re_text).map_err(|err| EquationError::Syntax { line: *line, err })?
            };
            regexes.push(r.clone());
            items.push(match var {
                None => Rhs::Pure(r),
                Some(vn) => {
                    let v = vars.get(vn).ok_or_else(|| EquationError::UndefinedVar(vn.clone()))?;
                    Rhs::Coef(r, v.clone())
                }
            });
        }
        let v = vars[name].clone();
        let (n, _) = normalize(&Rhs::sum_all(items), &v)?;
        eqs.push((v, n));
    }
    let alphabet = Alphabet::infer(regexes.iter());
    EquationSystem::new(alphabet, eqs)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn split_summand(s: &str) -> Result<(String, Option<String>), String> {
    match s.find(|c: char| c.is_ascii_uppercase()) {
        None => Ok((s.to_string(), None)),
        Some(i) => {
            let name = s[i..].trim();
            if !is_var_name(name) {
                return Err(format!("variable must end the summand: {s:?}"));
            }
            Ok((s[..i].to_string(), Some(name.to_string())))
        }
    }
}

/// The rewrite rules E1–E5 (E6 is the path of a step, E7 the step sequence).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ERule {
    /// γ1·(γ2+γ3) ≃ γ1·γ2 + γ1·γ3
    E1,
    /// γ1·(γ2·γ3) ≃ (γ1·γ2)·γ3
    E2,
    /// γ1+(γ2+γ3) ≃ (γ1+γ2)+γ3
    E3,
    /// γ2·γ1 + γ3·γ1 ≃ (γ2+γ3)·γ1
    E4,
    /// γ1+γ2 ≃ γ2+γ1
    E5,
}

/// Forward rewrites the left side of a rule into its right side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Hole position inside a sum: `β[] + β` is `Left`, `β + β[]` is `Right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub rule: ERule,
    pub dir: Direction,
    pub path: Vec<Side>,
}

/// A checkable equivalence proof: `steps` rewrite `source` into `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivDerivation {
    pub source: Gamma,
    pub target: Gamma,
    pub steps: Vec<Step>,
}

impl EquivDerivation {
    pub fn identity(g: Gamma) -> EquivDerivation {
        EquivDerivation {
            source: g.clone(),
            target: g,
            steps: Vec::new(),
        }
    }

    /// Replays the steps from `source`; `None` if some step does not apply.
    pub fn replay(&self) -> Option<Gamma> {
        let mut g = self.source.clone();
        for s in &self.steps {
            g = apply_step(&g, s)?;
        }
        Some(g)
    }

    pub fn is_valid(&self) -> bool {
        self.replay().as_ref() == Some(&self.target)
    }
}

/// Applies one rule at the root of `g`.
pub fn apply_rule(g: &Gamma, rule: ERule, dir: Direction) -> Option<Gamma> {
    use Direction::*;
    use ERule::*;
    match (rule, dir) {
        (E1, Forward) => {
            let (g1, rest) = g.view_seq()?;
            let (g2, g3) = rest.view_alt()?;
            Some(Gamma::alt(Gamma::seq(g1.clone(), g2), Gamma::seq(g1, g3)))
        }
        (E1, Backward) => {
            let (l, r) = g.view_alt()?;
            let (g1, g2) = l.view_seq()?;
            let (g1b, g3) = r.view_seq()?;
            (g1 == g1b).then(|| Gamma::seq(g1, Gamma::alt(g2, g3)))
        }
        (E2, Forward) => {
            let (g1, rest) = g.view_seq()?;
            let (g2, g3) = rest.view_seq()?;
            Some(Gamma::seq(Gamma::seq(g1, g2), g3))
        }
        (E2, Backward) => {
            let (l, g3) = g.view_seq()?;
            let (g1, g2) = l.view_seq()?;
            Some(Gamma::seq(g1, Gamma::seq(g2, g3)))
        }
        (E3, Forward) => {
            let (g1, rest) = g.view_alt()?;
            let (g2, g3) = rest.view_alt()?;
            Some(Gamma::alt(Gamma::alt(g1, g2), g3))
        }
        (E3, Backward) => {
            let (l, g3) = g.view_alt()?;
            let (g1, g2) = l.view_alt()?;
            Some(Gamma::alt(g1, Gamma::alt(g2, g3)))
        }
        (E4, Forward) => {
            let (l, r) = g.view_alt()?;
            let (g2, g1) = l.view_seq()?;
            let (g3, g1b) = r.view_seq()?;
            (g1 == g1b).then(|| Gamma::seq(Gamma::alt(g2, g3), g1))
        }
        (E4, Backward) => {
            let (l, g1) = g.view_seq()?;
            let (g2, g3) = l.view_alt()?;
            Some(Gamma::alt(Gamma::seq(g2, g1.clone()), Gamma::seq(g3, g1)))
        }
        (E5, _) => {
            let (g1, g2) = g.view_alt()?;
            Some(Gamma::alt(g2, g1))
        }
    }
}

/// Applies a step under its hole context.
pub fn apply_step(g: &Gamma, step: &Step) -> Option<Gamma> {
    at_path(g, &step.path, &|h| apply_rule(h, step.rule, step.dir))
}

fn at_path(g: &Gamma, path: &[Side], f: &dyn Fn(&Gamma) -> Option<Gamma>) -> Option<Gamma> {
    match path.split_first() {
        None => f(g),
        Some((side, rest)) => {
            let (a, b) = g.view_alt()?;
            match side {
                Side::Left => Some(Gamma::alt(at_path(&a, rest, f)?, b)),
                Side::Right => Some(Gamma::alt(a, at_path(&b, rest, f)?)),
            }
        }
    }
}

struct Normalizer {
    cur: Gamma,
    steps: Vec<Step>,
}

enum Action {
    Atomic,
    Flatten,
    Distribute,
    Reassociate,
}

fn classify(s: &Gamma) -> Result<Action, EquationError> {
    match s {
        Gamma::Re(_) => Ok(Action::Atomic),
        Gamma::Var(v) => Err(EquationError::NotRightLinear(format!(
            "variable {v} without coefficient"
        ))),
        Gamma::Alt(..) => Ok(Action::Flatten),
        Gamma::Seq(a, b) => {
            if !a.is_pure() {
                return Err(EquationError::NotRightLinear(s.to_string()));
            }
            match **b {
                Gamma::Var(_) => Ok(Action::Atomic),
                Gamma::Alt(..) => Ok(Action::Distribute),
                Gamma::Seq(..) => Ok(Action::Reassociate),
                Gamma::Re(_) => Err(EquationError::NotRightLinear(s.to_string())),
            }
        }
    }
}

fn term_var(s: &Gamma) -> Option<&Var> {
    match s {
        Gamma::Seq(_, b) => match &**b {
            Gamma::Var(v) => Some(v),
            _ => None,
        },
        _ => None,
    }
}

fn spine(n: usize) -> Vec<Side> {
    vec![Side::Right; n]
}

impl Normalizer {
    fn apply(&mut self, rule: ERule, dir: Direction, path: Vec<Side>) {
        let step = Step { rule, dir, path };
        self.cur = apply_step(&self.cur, &step).expect("normalization step applies by construction");
        self.steps.push(step);
    }

    fn summands(&self) -> Vec<Gamma> {
        let mut out = Vec::new();
        let mut g = &self.cur;
        while let Gamma::Alt(a, b) = g {
            out.push((**a).clone());
            g = b;
        }
        out.push(g.clone());
        out
    }

    fn summand_path(i: usize, n: usize) -> Vec<Side> {
        let mut p = spine(i);
        if i + 1 < n {
            p.push(Side::Left);
        }
        p
    }

    fn flatten_and_distribute(&mut self) -> Result<(), EquationError> {
        loop {
            let s = self.summands();
            let n = s.len();
            let mut acted = false;
            for (i, t) in s.iter().enumerate() {
                match classify(t)? {
                    Action::Atomic => continue,
                    Action::Flatten => self.apply(ERule::E3, Direction::Backward, spine(i)),
                    Action::Distribute => self.apply(ERule::E1, Direction::Forward, Self::summand_path(i, n)),
                    Action::Reassociate => self.apply(ERule::E2, Direction::Forward, Self::summand_path(i, n)),
                }
                acted = true;
                break;
            }
            if !acted {
                return Ok(());
            }
        }
    }

    /// Swaps summands `k` and `k+1`.
    fn swap(&mut self, k: usize) {
        let n = self.summands().len();
        if k + 2 == n {
            self.apply(ERule::E5, Direction::Forward, spine(k));
        } else {
            self.apply(ERule::E3, Direction::Forward, spine(k));
            let mut left = spine(k);
            left.push(Side::Left);
            self.apply(ERule::E5, Direction::Forward, left);
            self.apply(ERule::E3, Direction::Backward, spine(k));
        }
    }

    /// Merges adjacent terms `c_i·V` and `c_{i+1}·V` into `(c_{i+1} + c_i)·V`.
    fn merge_adjacent(&mut self, i: usize) {
        self.swap(i);
        let n = self.summands().len();
        if i + 2 == n {
            self.apply(ERule::E4, Direction::Forward, spine(i));
        } else {
            self.apply(ERule::E3, Direction::Forward, spine(i));
            let mut left = spine(i);
            left.push(Side::Left);
            self.apply(ERule::E4, Direction::Forward, left);
        }
    }

    fn merge_duplicates(&mut self) {
        loop {
            let s = self.summands();
            let mut found = None;
            'outer: for j in 0..s.len() {
                if let Some(vj) = term_var(&s[j]) {
                    for (i, si) in s.iter().enumerate().take(j) {
                        if term_var(si) == Some(vj) {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
            }
            let Some((i, j)) = found else { return };
            for k in (i + 1..j).rev() {
                self.swap(k);
            }
            self.merge_adjacent(i);
        }
    }

    fn pure_to_end(&mut self) {
        loop {
            let s = self.summands();
            let k = (0..s.len().saturating_sub(1)).find(|&k| s[k].is_pure() && !s[k + 1].is_pure());
            match k {
                Some(k) => self.swap(k),
                None => return,
            }
        }
    }

    fn self_to_front(&mut self, self_var: &Var) {
        let s = self.summands();
        if let Some(k) = s.iter().position(|t| term_var(t) == Some(self_var)) {
            for m in (0..k).rev() {
                self.swap(m);
            }
        }
    }
}

/// Brings `rhs` into normal form for the equation of `self_var`.
///
/// The derivation rewrites the rendered source into the rendering of the
/// result. When the source has no variable-free summand the result's φ tail
/// is not part of the derivation target.
pub fn normalize(rhs: &Rhs, self_var: &Var) -> Result<(NormalRhs, EquivDerivation), EquationError> {
    normalize_gamma(&rhs.to_gamma(), self_var)
}

/// [`normalize`] for an arbitrary right-linear expression.
pub fn normalize_gamma(g: &Gamma, self_var: &Var) -> Result<(NormalRhs, EquivDerivation), EquationError> {
    let source = g.canonical();
    let mut n = Normalizer {
        cur: source.clone(),
        steps: Vec::new(),
    };
    n.flatten_and_distribute()?;
    n.merge_duplicates();
    n.pure_to_end();
    n.self_to_front(self_var);
    let mut out = NormalRhs::pure(Regex::Phi);
    let summands = n.summands();
    let last = summands.len() - 1;
    for (i, t) in summands.into_iter().enumerate() {
        match t {
            Gamma::Re(r) if i == last => out.tail = r,
            Gamma::Seq(c, v) => match (*c, *v) {
                (Gamma::Re(c), Gamma::Var(v)) => {
                    if &v == self_var {
                        out.self_coef = Some(c);
                    } else {
                        out.pairs.push((c, v));
                    }
                }
                (c, v) => unreachable!("normalized summand {c}·{v}"),
            },
            t => unreachable!("normalized summand {t}"),
        }
    }
    Ok((
        out,
        EquivDerivation {
            source,
            target: n.cur,
            steps: n.steps,
        },
    ))
}

/// Arden's rule on a normal right-hand side `s·v + α`: returns the normal
/// form of `s*·α` (coefficients distributed, tail `s*·t`).
pub fn arden_step(v: &Var, rhs: &NormalRhs) -> Result<NormalRhs, EquationError> {
    let Some(s) = &rhs.self_coef else {
        return Err(EquationError::NoSelfTerm(v.name.clone()));
    };
    let g = Gamma::seq(Gamma::Re(Regex::star(s.clone())), rhs.render_rest());
    Ok(normalize_gamma(&g, v)?.0)
}

/// A substitution from variables to expressions (closed when solving ends).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution(pub BTreeMap<Var, Regex>);

impl Solution {
    pub fn get(&self, v: &Var) -> Option<&Regex> {
        self.0.get(v)
    }

    pub fn by_name(&self, name: &str) -> Option<&Regex> {
        self.0.iter().find(|(v, _)| v.name == name).map(|(_, r)| r)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(v, r)| format!("{v} = {r}\n")).collect()
    }
}

/// Intermediate accumulator whose codomain may still mention unsolved variables.
pub type PartialSolution = Vec<(Var, Gamma)>;

/// Removes `v` (which must have no self term) from `sys`, substituting its
/// right-hand side into the remaining equations and into `acc`.
pub fn subst_step(
    sys: &EquationSystem,
    acc: &PartialSolution,
    v: &Var,
) -> Result<(EquationSystem, PartialSolution), EquationError> {
    let eq = sys.get(v).ok_or_else(|| EquationError::UnknownVar(v.name.clone()))?;
    if eq.rhs.self_coef.is_some() {
        return Err(EquationError::SelfTermPresent(v.name.clone()));
    }
    let alpha = eq.gamma.clone();
    subst_with(sys, acc, v, &alpha)
}

fn subst_with(
    sys: &EquationSystem,
    acc: &PartialSolution,
    v: &Var,
    alpha: &Gamma,
) -> Result<(EquationSystem, PartialSolution), EquationError> {
    let mut eqs = Vec::with_capacity(sys.len());
    for e in &sys.eqs {
        if &e.var == v {
            continue;
        }
        if e.rhs.mentions(v) {
            let (n, _) = normalize_gamma(&e.gamma.substitute(v, alpha), &e.var)?;
            eqs.push(Equation::new(e.var.clone(), n));
        } else {
            eqs.push(e.clone());
        }
    }
    let mut acc: PartialSolution = acc.iter().map(|(w, g)| (w.clone(), g.substitute(v, alpha))).collect();
    acc.push((v.clone(), alpha.clone()));
    Ok((
        EquationSystem {
            alphabet: sys.alphabet.clone(),
            eqs,
        },
        acc,
    ))
}

/// The expression substituted for `v` when it is eliminated: `s*·α` if the
/// equation has a self term `s·v`, otherwise its right-hand side.
pub fn elimination_form(eq: &Equation) -> Gamma {
    match &eq.rhs.self_coef {
        Some(s) => Gamma::seq(Gamma::Re(Regex::star(s.clone())), eq.rhs.render_rest()),
        None => eq.gamma.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Default,
    DelgadoMorais,
    CycleCount,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Default, Strategy::DelgadoMorais, Strategy::CycleCount];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Default => "default",
            Strategy::DelgadoMorais => "delgado",
            Strategy::CycleCount => "cycles",
        }
    }
}

/// The well-founded measure of the termination argument: number of
/// equations, then number of variable occurrences on right-hand sides.
pub fn measure(sys: &EquationSystem) -> (usize, usize) {
    let occ = sys
        .eqs
        .iter()
        .map(|e| e.rhs.pairs.len() + usize::from(e.rhs.self_coef.is_some()))
        .sum();
    (sys.len(), occ)
}

/// Solves `sys`, choosing the next equation by `strategy`.
pub fn solve(sys: &EquationSystem, strategy: Strategy) -> Result<Solution, EquationError> {
    solve_traced(sys, |s| next_equation(s, strategy)).map(|(sol, _)| sol)
}

/// Solves `sys` eliminating variables in exactly the given order.
pub fn solve_with_order(sys: &EquationSystem, order: &[Var]) -> Result<Solution, EquationError> {
    let mut it = order.iter();
    solve_traced(sys, |s| {
        it.by_ref()
            .find(|v| s.get(v).is_some())
            .cloned()
            .unwrap_or_else(|| s.eqs[0].var.clone())
    })
    .map(|(sol, _)| sol)
}

/// Solves `sys`, also returning the measure of every intermediate
/// configuration (one after each Arden and each Subst step).
pub fn solve_traced(
    sys: &EquationSystem,
    mut pick: impl FnMut(&EquationSystem) -> Var,
) -> Result<(Solution, Vec<(usize, usize)>), EquationError> {
    let mut cur = sys.clone();
    let mut acc: PartialSolution = Vec::new();
    let mut trace = vec![measure(&cur)];
    while !cur.is_empty() {
        let v = pick(&cur);
        let eq = cur.get(&v).ok_or_else(|| EquationError::UnknownVar(v.name.clone()))?;
        let alpha = elimination_form(eq);
        if eq.rhs.self_coef.is_some() {
            let (n, occ) = measure(&cur);
            trace.push((n, occ - 1));
        }
        let (next, next_acc) = subst_with(&cur, &acc, &v, &alpha)?;
        cur = next;
        acc = next_acc;
        trace.push(measure(&cur));
    }
    let mut out = BTreeMap::new();
    for (v, g) in acc {
        let r = g
            .to_regex()
            .ok_or_else(|| EquationError::UndefinedVar(format!("{g}")))?;
        out.insert(v, r);
    }
    Ok((Solution(out), trace))
}

/// True iff every equation holds under `sol` on words up to `max_len`.
pub fn check_solution(sys: &EquationSystem, sol: &Solution, max_len: usize) -> bool {
    sys.eqs.iter().all(|e| {
        let (Some(lhs), Some(rhs)) = (sol.get(&e.var), e.gamma.instantiate(sol)) else {
            return false;
        };
        lang_upto(lhs, max_len) == lang_upto(&rhs, max_len)
    })
}

/// Delgado–Morais weight of `v`.
pub fn delgado_weight(sys: &EquationSystem, v: &Var) -> i64 {
    let Some(eq) = sys.get(v) else { return 0 };
    let ins: Vec<i64> = sys
        .eqs
        .iter()
        .filter(|e| &e.var != v)
        .filter_map(|e| e.rhs.coef_of(v))
        .map(|c| alphabetic_width(c) as i64)
        .collect();
    let mut outs: Vec<i64> = eq.rhs.pairs.iter().map(|(c, _)| alphabetic_width(c) as i64).collect();
    outs.push(alphabetic_width(&eq.rhs.tail) as i64);
    let lp = eq.rhs.self_coef.as_ref().map_or(0, |s| alphabetic_width(s) as i64);
    let (n_in, n_out) = (ins.len() as i64, outs.len() as i64);
    let sum_in: i64 = ins.iter().sum();
    let sum_out: i64 = outs.iter().sum();
    (n_in - 1) * sum_out + (n_out - 1) * sum_in + (n_in * n_out - 1) * lp
}

/// Limit on simple cycles enumerated per graph; counts saturate beyond it.
pub const CYCLE_LIMIT: usize = 200_000;

/// Number of simple cycles through each variable of the dependency graph
/// (edge R → S when S occurs in R's right-hand side; self loops count).
pub fn cycle_counts(sys: &EquationSystem) -> HashMap<Var, usize> {
    let vars = sys.vars();
    let idx: HashMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let n = vars.len();
    let mut succ = vec![Vec::new(); n];
    for e in &sys.eqs {
        let i = idx[&e.var];
        if e.rhs.self_coef.is_some() {
            succ[i].push(i);
        }
        for (_, w) in &e.rhs.pairs {
            succ[i].push(idx[w]);
        }
    }
    let mut counts = vec![0usize; n];
    let mut total = 0usize;
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut stack: Vec<usize> = vec![0];
        while let Some(&pos) = stack.last() {
            let u = *path.last().unwrap();
            if pos >= succ[u].len() || total >= CYCLE_LIMIT {
                stack.pop();
                on_path[u] = false;
                path.pop();
                continue;
            }
            *stack.last_mut().unwrap() += 1;
            let w = succ[u][pos];
            if w == start {
                total += 1;
                for &p in &path {
                    counts[p] += 1;
                }
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(w);
                stack.push(0);
            }
        }
    }
    vars.into_iter().zip(counts).collect()
}

pub fn cycle_count(sys: &EquationSystem, v: &Var) -> usize {
    cycle_counts(sys).get(v).copied().unwrap_or(0)
}

/// The next variable to eliminate; ties go to the lowest index.
pub fn next_equation(sys: &EquationSystem, strategy: Strategy) -> Var {
    let by_index = |a: &Var, b: &Var| a.index.cmp(&b.index);
    match strategy {
        Strategy::Default => sys.eqs.iter().map(|e| &e.var).min_by(|a, b| by_index(a, b)).cloned(),
        Strategy::DelgadoMorais => sys
            .eqs
            .iter()
            .map(|e| (delgado_weight(sys, &e.var), &e.var))
            .min_by(|(wa, a), (wb, b)| wa.cmp(wb).then(by_index(a, b)))
            .map(|(_, v)| v.clone()),
        Strategy::CycleCount => {
            let counts = cycle_counts(sys);
            sys.eqs
                .iter()
                .map(|e| (counts[&e.var], &e.var))
                .min_by(|(ca, a), (cb, b)| ca.cmp(cb).then(by_index(a, b)))
                .map(|(_, v)| v.clone())
        }
    }
    .expect("next_equation on an empty system")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex_core::re;

    fn r(i: usize) -> Var {
        Var::numbered(i)
    }

    fn coef(c: &str, v: usize) -> Rhs {
        Rhs::Coef(re(c), r(v))
    }

    fn mutual_pair() -> EquationSystem {
        parse_system("R1 = x R1 + y R2 + ~\nR2 = y R1 + x R2 + ~").unwrap()
    }

    #[test]
    fn parse_system_normalizes_self_first() {
        let sys = mutual_pair();
        let e2 = sys.get(&r(2)).unwrap();
        assert_eq!(e2.rhs.self_coef, Some(re("x")));
        assert_eq!(e2.rhs.pairs, vec![(re("y"), r(1))]);
        assert_eq!(e2.rhs.tail, Regex::Eps);
        assert_eq!(sys.to_text(), "R1 = x R1 + y R2 + ~\nR2 = x R2 + y R1 + ~\n");
    }

    #[test]
    fn parse_system_errors() {
        assert!(matches!(parse_system("R1 = x R2"), Err(EquationError::UndefinedVar(_))));
        assert!(matches!(
            parse_system("R1 = x R1\nR1 = y"),
            Err(EquationError::Format { line: 2, .. })
        ));
        assert!(matches!(
            parse_system("r1 = x"),
            Err(EquationError::Format { line: 1, .. })
        ));
        assert!(matches!(parse_system("R1 = x R1 y"), Err(EquationError::Format { .. })));
        assert!(matches!(parse_system("R1 = x +"), Err(EquationError::Format { .. })));
        assert!(matches!(
            parse_system("R1 = (x"),
            Err(EquationError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn normalize_mutual_pair_substitution() {
        let rhs = Rhs::sum_all(vec![coef("x", 2), Rhs::Coef(re("y"), r(1)), Rhs::Pure(Regex::Eps)]);
        let sub = Gamma::seq(
            Gamma::Re(re("x*")),
            Gamma::alt(Gamma::seq(Gamma::Re(re("y")), Gamma::Var(r(2))), Gamma::Re(Regex::Eps)),
        );
        let g = rhs.to_gamma().substitute(&r(1), &sub);
        let (n, d) = normalize_gamma(&g, &r(2)).unwrap();
        assert_eq!(n.self_coef, Some(Regex::alt(Regex::seq(re("y x*"), re("y")), re("x"))));
        assert!(n.pairs.is_empty());
        assert_eq!(n.tail, Regex::alt(Regex::seq(re("y x*"), Regex::Eps), Regex::Eps));
        assert!(d.is_valid());
        assert_eq!(d.target, n.render(&r(2)));
    }

    #[test]
    fn normalize_already_normal() {
        let (n, d) = normalize(&Rhs::sum(coef("x", 1), Rhs::Pure(Regex::Eps)), &r(2)).unwrap();
        assert_eq!(n.self_coef, None);
        assert_eq!(n.pairs, vec![(re("x"), r(1))]);
        assert_eq!(n.tail, Regex::Eps);
        assert!(d.steps.is_empty());
    }

    #[test]
    fn normalize_merges_and_rotates() {
        let rhs = Rhs::sum_all(vec![coef("x", 2), coef("y", 1), coef("x", 1)]);
        let (n, d) = normalize(&rhs, &r(1)).unwrap();
        assert_eq!(n.self_coef, Some(re("x + y")));
        assert_eq!(n.pairs, vec![(re("x"), r(2))]);
        assert_eq!(n.tail, Regex::Phi);
        assert!(d.is_valid());
        // Semantic check: instantiate R1 := z, R2 := w.
        let sol = Solution(BTreeMap::from([(r(1), re("z")), (r(2), re("w"))]));
        let before = rhs.to_gamma().instantiate(&sol).unwrap();
        let after = d.target.instantiate(&sol).unwrap();
        assert_eq!(lang_upto(&before, 3), lang_upto(&after, 3));
    }

    #[test]
    fn arden_examples() {
        let sys = mutual_pair();
        let n = arden_step(&r(1), &sys.get(&r(1)).unwrap().rhs).unwrap();
        assert_eq!(n.self_coef, None);
        assert_eq!(n.pairs, vec![(re("x* y"), r(2))]);
        assert_eq!(n.tail, Regex::seq(re("x*"), Regex::Eps));
        let rhs = NormalRhs {
            self_coef: Some(re("x")),
            pairs: vec![],
            tail: re("y"),
        };
        assert_eq!(arden_step(&r(1), &rhs).unwrap().tail, re("x* y"));
        let rhs = NormalRhs {
            self_coef: Some(Regex::Phi),
            pairs: vec![],
            tail: re("x"),
        };
        assert_eq!(arden_step(&r(1), &rhs).unwrap().tail, re("!* x"));
        assert!(matches!(
            arden_step(&r(1), &NormalRhs::pure(re("x"))),
            Err(EquationError::NoSelfTerm(_))
        ));
    }

    #[test]
    fn subst_step_examples() {
        let sys = parse_system("R = x").unwrap();
        let v = sys.vars()[0].clone();
        let (rest, acc) = subst_step(&sys, &Vec::new(), &v).unwrap();
        assert!(rest.is_empty());
        assert_eq!(acc, vec![(v, Gamma::Re(re("x")))]);

        let sys = parse_system("R1 = x R2 + ~\nR2 = y\nR3 = x R3 + ~").unwrap();
        let (rest, _) = subst_step(&sys, &Vec::new(), &r(2)).unwrap();
        assert_eq!(rest.get(&r(3)), sys.get(&r(3)));
        assert_eq!(rest.get(&r(1)).unwrap().rhs, NormalRhs::pure(re("x y + ~")));
        assert!(matches!(
            subst_step(&sys, &Vec::new(), &r(3)),
            Err(EquationError::SelfTermPresent(_))
        ));
    }

    #[test]
    fn solve_mutual_pair_default() {
        let sys = mutual_pair();
        let sol = solve(&sys, Strategy::Default).unwrap();
        let psi2 = re("(y x* y + x)* (y x* ~ + ~)");
        assert_eq!(crate::regex_core::right_assoc(sol.get(&r(2)).unwrap()), psi2);
        let psi1 = Regex::seq(
            re("x*"),
            Regex::alt(Regex::seq(re("y"), sol.get(&r(2)).unwrap().clone()), Regex::Eps),
        );
        assert_eq!(sol.get(&r(1)).unwrap(), &psi1);
        assert!(check_solution(&sys, &sol, 6));
    }

    #[test]
    fn solve_single_equation_with_pure_tail() {
        let sys = parse_system("R = x R + y").unwrap();
        let sol = solve(&sys, Strategy::Default).unwrap();
        assert_eq!(sol.by_name("R").unwrap(), &re("x* y"));
    }

    #[test]
    fn check_solution_examples() {
        let sys = parse_system("R = x").unwrap();
        let v = sys.vars()[0].clone();
        assert!(!check_solution(
            &sys,
            &Solution(BTreeMap::from([(v.clone(), re("y"))])),
            3
        ));
        assert!(check_solution(&sys, &Solution(BTreeMap::from([(v, re("x"))])), 3));
        let empty = EquationSystem::empty(Alphabet::new(['x']).unwrap());
        assert!(check_solution(&empty, &Solution::default(), 6));
    }

    #[test]
    fn weights_and_cycles() {
        let sys = parse_system("R1 = x R2 + ~\nR2 = y R1 + x R2 + ~").unwrap();
        assert_eq!(delgado_weight(&sys, &r(1)), 1);
        assert_eq!(delgado_weight(&sys, &r(2)), 2);
        assert_eq!(cycle_count(&sys, &r(1)), 1);
        assert_eq!(cycle_count(&sys, &r(2)), 2);
        assert_eq!(next_equation(&sys, Strategy::Default), r(1));
        assert_eq!(next_equation(&sys, Strategy::DelgadoMorais), r(1));
        assert_eq!(next_equation(&sys, Strategy::CycleCount), r(1));

        let iso = parse_system("R = x").unwrap();
        assert_eq!(delgado_weight(&iso, &iso.vars()[0]), -1);
        let chain = parse_system("R1 = x R2 + ~\nR2 = y").unwrap();
        assert_eq!(delgado_weight(&chain, &r(2)), 0);
        assert_eq!(cycle_count(&chain, &r(1)), 0);
        let lp = parse_system("R = x R + ~").unwrap();
        assert_eq!(cycle_count(&lp, &lp.vars()[0]), 1);
    }

    #[test]
    fn in_one_out_one_weight_is_zero() {
        let sys = parse_system("R1 = x R2 + ~\nR2 = y R3\nR3 = x R1 + ~").unwrap();
        let w = delgado_weight(&sys, &r(3));
        assert_eq!(w, 1);
        let sys = parse_system("R1 = x R2\nR2 = y").unwrap();
        assert_eq!(delgado_weight(&sys, &r(2)), 0);
    }

    #[test]
    fn trace_decreases() {
        let sys = mutual_pair();
        let (_, trace) = solve_traced(&sys, |s| next_equation(s, Strategy::Default)).unwrap();
        assert!(trace.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(trace.last(), Some(&(0, 0)));
    }

    #[test]
    fn replay_rejects_bad_steps() {
        let d = EquivDerivation {
            source: Gamma::Re(re("x")),
            target: Gamma::Re(re("x")),
            steps: vec![Step {
                rule: ERule::E5,
                dir: Direction::Forward,
                path: vec![],
            }],
        };
        assert!(!d.is_valid());
        assert!(EquivDerivation::identity(Gamma::Re(re("x"))).is_valid());
    }
}
