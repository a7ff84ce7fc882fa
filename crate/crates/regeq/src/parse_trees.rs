//! Parse trees, the typing judgment `E ⊢ v : γ`, flattening, the derivative
//! parser for equation systems, and bounded tree enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::derivatives::deriv;
use crate::equations::{EquationSystem, Gamma, RhsLookup, Var};
use crate::regex_core::{is_symbol, nullable, Regex, Symbol};

/// The γ over which typing and derivatives are defined.
pub type RhsOrRegex = Gamma;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParseTree {
    Eps,
    Sym(Symbol),
    Seq(Box<ParseTree>, Box<ParseTree>),
    Inl(Box<ParseTree>),
    Inr(Box<ParseTree>),
    List(Vec<ParseTree>),
    Fold(Box<ParseTree>),
}

impl ParseTree {
    pub fn seq(a: ParseTree, b: ParseTree) -> ParseTree {
        ParseTree::Seq(Box::new(a), Box::new(b))
    }

    pub fn inl(a: ParseTree) -> ParseTree {
        ParseTree::Inl(Box::new(a))
    }

    pub fn inr(a: ParseTree) -> ParseTree {
        ParseTree::Inr(Box::new(a))
    }

    pub fn fold(a: ParseTree) -> ParseTree {
        ParseTree::Fold(Box::new(a))
    }

    pub fn node_count(&self) -> usize {
        match self {
            ParseTree::Eps | ParseTree::Sym(_) => 1,
            ParseTree::Seq(a, b) => 1 + a.node_count() + b.node_count(),
            ParseTree::Inl(a) | ParseTree::Inr(a) | ParseTree::Fold(a) => 1 + a.node_count(),
            ParseTree::List(vs) => 1 + vs.iter().map(ParseTree::node_count).sum::<usize>(),
        }
    }

    /// Removes every `Fold` wrapper.
    pub fn unfolded(&self) -> ParseTree {
        match self {
            ParseTree::Eps | ParseTree::Sym(_) => self.clone(),
            ParseTree::Seq(a, b) => ParseTree::seq(a.unfolded(), b.unfolded()),
            ParseTree::Inl(a) => ParseTree::inl(a.unfolded()),
            ParseTree::Inr(a) => ParseTree::inr(a.unfolded()),
            ParseTree::Fold(a) => a.unfolded(),
            ParseTree::List(vs) => ParseTree::List(vs.iter().map(ParseTree::unfolded).collect()),
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseTree::Eps => write!(f, "eps"),
            ParseTree::Sym(c) => write!(f, "(sym {c})"),
            ParseTree::Seq(a, b) => write!(f, "(seq {a} {b})"),
            ParseTree::Inl(a) => write!(f, "(inl {a})"),
            ParseTree::Inr(a) => write!(f, "(inr {a})"),
            ParseTree::Fold(a) => write!(f, "(fold {a})"),
            ParseTree::List(vs) => {
                write!(f, "(list")?;
                for v in vs {
                    write!(f, " {v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("{0} is not nullable")]
    NotNullable(String),
    #[error("empty-tree construction revisits {0}")]
    Cycle(String),
    #[error("equation for {0} has a nullable coefficient")]
    Unguarded(String),
    #[error("no parse for {0:?}")]
    NoParse(String),
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("tree {tree} does not fit {ty}")]
    Shape { tree: String, ty: String },
    #[error("s-expression error at {pos}: {msg}")]
    Sexp { pos: usize, msg: String },
}

/// Parses the s-expression form produced by `Display`.
pub fn tree_of_text(s: &str) -> Result<ParseTree, TreeError> {
    let toks = tokenize(s);
    let mut pos = 0;
    let t = parse_sexp(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(TreeError::Sexp {
            pos,
            msg: "trailing input".into(),
        });
    }
    Ok(t)
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_sexp(toks: &[String], pos: &mut usize) -> Result<ParseTree, TreeError> {
    let err = |pos: usize, msg: &str| TreeError::Sexp {
        pos,
        msg: msg.to_string(),
    };
    let tok = toks.get(*pos).ok_or_else(|| err(*pos, "unexpected end"))?;
    *pos += 1;
    match tok.as_str() {
        "eps" => return Ok(ParseTree::Eps),
        "(" => {}
        _ => return Err(err(*pos - 1, "expected `(` or `eps`")),
    }
    let head = toks.get(*pos).ok_or_else(|| err(*pos, "unexpected end"))?.clone();
    *pos += 1;
    let t = match head.as_str() {
        "sym" => {
            let c = toks.get(*pos).ok_or_else(|| err(*pos, "missing symbol"))?;
            let mut cs = c.chars();
            let (Some(x), None) = (cs.next(), cs.next()) else {
                return Err(err(*pos, "bad symbol"));
            };
            if !is_symbol(x) {
                return Err(err(*pos, "bad symbol"));
            }
            *pos += 1;
            ParseTree::Sym(x)
        }
        "seq" => {
            let a = parse_sexp(toks, pos)?;
            let b = parse_sexp(toks, pos)?;
            ParseTree::seq(a, b)
        }
        "inl" => ParseTree::inl(parse_sexp(toks, pos)?),
        "inr" => ParseTree::inr(parse_sexp(toks, pos)?),
        "fold" => ParseTree::fold(parse_sexp(toks, pos)?),
        "list" => {
            let mut vs = Vec::new();
            while toks.get(*pos).map(String::as_str) != Some(")") {
                vs.push(parse_sexp(toks, pos)?);
            }
            ParseTree::List(vs)
        }
        _ => return Err(err(*pos - 1, "unknown constructor")),
    };
    if toks.get(*pos).map(String::as_str) != Some(")") {
        return Err(err(*pos, "expected `)`"));
    }
    *pos += 1;
    Ok(t)
}

/// Right-hand sides given directly as expressions, used for intermediate
/// systems whose equations are not in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GammaEnv(pub BTreeMap<Var, Gamma>);

impl RhsLookup for GammaEnv {
    fn rhs_gamma(&self, v: &Var) -> Option<&Gamma> {
        self.0.get(v)
    }
}

impl From<&EquationSystem> for GammaEnv {
    fn from(sys: &EquationSystem) -> GammaEnv {
        GammaEnv(
            sys.equations()
                .iter()
                .map(|e| (e.var.clone(), e.gamma().clone()))
                .collect(),
        )
    }
}

pub fn flatten(v: &ParseTree) -> String {
    let mut s = String::new();
    flatten_into(v, &mut s);
    s
}

fn flatten_into(v: &ParseTree, out: &mut String) {
    match v {
        ParseTree::Eps => {}
        ParseTree::Sym(c) => out.push(*c),
        ParseTree::Seq(a, b) => {
            flatten_into(a, out);
            flatten_into(b, out);
        }
        ParseTree::Inl(a) | ParseTree::Inr(a) | ParseTree::Fold(a) => flatten_into(a, out),
        ParseTree::List(vs) => vs.iter().for_each(|t| flatten_into(t, out)),
    }
}

pub fn typecheck_regex(v: &ParseTree, r: &Regex) -> bool {
    match (v, r) {
        (ParseTree::Eps, Regex::Eps) => true,
        (ParseTree::Sym(a), Regex::Sym(b)) => a == b,
        (ParseTree::Seq(a, b), Regex::Seq(r1, r2)) => typecheck_regex(a, r1) && typecheck_regex(b, r2),
        (ParseTree::Inl(a), Regex::Alt(r1, _)) => typecheck_regex(a, r1),
        (ParseTree::Inr(b), Regex::Alt(_, r2)) => typecheck_regex(b, r2),
        (ParseTree::List(vs), Regex::Star(r1)) => vs.iter().all(|t| typecheck_regex(t, r1)),
        _ => false,
    }
}

/// Derivability of `E ⊢ v : g`.
pub fn typecheck(sys: &impl RhsLookup, v: &ParseTree, g: &Gamma) -> bool {
    match (v, g) {
        (_, Gamma::Re(r)) => typecheck_regex(v, r),
        (ParseTree::Fold(w), Gamma::Var(x)) => match sys.rhs_gamma(x) {
            Some(rhs) => typecheck(sys, w, rhs),
            None => false,
        },
        (ParseTree::Seq(a, b), Gamma::Seq(g1, g2)) => typecheck(sys, a, g1) && typecheck(sys, b, g2),
        (ParseTree::Inl(a), Gamma::Alt(g1, _)) => typecheck(sys, a, g1),
        (ParseTree::Inr(b), Gamma::Alt(_, g2)) => typecheck(sys, b, g2),
        _ => false,
    }
}

/// Checks that every coefficient on a variable term is non-nullable.
pub fn check_guarded(sys: &EquationSystem) -> Result<(), TreeError> {
    for e in sys.equations() {
        let bad = e
            .rhs
            .self_coef
            .iter()
            .chain(e.rhs.pairs.iter().map(|(c, _)| c))
            .any(nullable);
        if bad {
            return Err(TreeError::Unguarded(e.var.name.clone()));
        }
    }
    Ok(())
}

struct Ctx<'a, L: RhsLookup> {
    sys: &'a L,
    nullable: HashMap<Var, bool>,
}

impl<'a, L: RhsLookup> Ctx<'a, L> {
    /// Nullability of every variable reachable from `g`, by least fixpoint.
    fn new(sys: &'a L, g: &Gamma) -> Result<Self, TreeError> {
        let mut seen: BTreeSet<Var> = BTreeSet::new();
        let mut stack = g.vars();
        let mut rhs = Vec::new();
        while let Some(v) = stack.pop() {
            if !seen.insert(v.clone()) {
                continue;
            }
            let r = sys.rhs_gamma(&v).ok_or_else(|| TreeError::UnknownVar(v.name.clone()))?;
            stack.extend(r.vars());
            rhs.push((v, r));
        }
        let mut ctx = Ctx {
            sys,
            nullable: rhs.iter().map(|(v, _)| (v.clone(), false)).collect(),
        };
        loop {
            let mut changed = false;
            for (v, r) in &rhs {
                if !ctx.nullable[v] && ctx.is_nullable(r) {
                    ctx.nullable.insert(v.clone(), true);
                    changed = true;
                }
            }
            if !changed {
                return Ok(ctx);
            }
        }
    }

    fn is_nullable(&self, g: &Gamma) -> bool {
        match g {
            Gamma::Re(r) => nullable(r),
            Gamma::Var(v) => self.nullable.get(v).copied().unwrap_or(false),
            Gamma::Seq(a, b) => self.is_nullable(a) && self.is_nullable(b),
            Gamma::Alt(a, b) => self.is_nullable(a) || self.is_nullable(b),
        }
    }

    fn rhs(&self, v: &Var) -> Result<&'a Gamma, TreeError> {
        self.sys
            .rhs_gamma(v)
            .ok_or_else(|| TreeError::UnknownVar(v.name.clone()))
    }

    fn mk_empty(&self, g: &Gamma, visiting: &mut Vec<Var>) -> Result<ParseTree, TreeError> {
        if !self.is_nullable(g) {
            return Err(TreeError::NotNullable(g.to_string()));
        }
        match g {
            Gamma::Re(r) => Ok(mk_empty_regex(r)),
            Gamma::Var(v) => {
                if visiting.contains(v) {
                    return Err(TreeError::Cycle(v.name.clone()));
                }
                visiting.push(v.clone());
                let t = self.mk_empty(self.rhs(v)?, visiting)?;
                visiting.pop();
                Ok(ParseTree::fold(t))
            }
            Gamma::Seq(a, b) => Ok(ParseTree::seq(self.mk_empty(a, visiting)?, self.mk_empty(b, visiting)?)),
            Gamma::Alt(a, b) => {
                if self.is_nullable(a) {
                    Ok(ParseTree::inl(self.mk_empty(a, visiting)?))
                } else {
                    Ok(ParseTree::inr(self.mk_empty(b, visiting)?))
                }
            }
        }
    }

    fn deriv(&self, g: &Gamma, x: Symbol) -> Result<Gamma, TreeError> {
        Ok(match g {
            Gamma::Re(r) => Gamma::Re(deriv(r, x)),
            Gamma::Var(v) => self.deriv(self.rhs(v)?, x)?,
            Gamma::Alt(a, b) => Gamma::alt(self.deriv(a, x)?, self.deriv(b, x)?),
            Gamma::Seq(a, b) => {
                let left = Gamma::seq(self.deriv(a, x)?, (**b).clone());
                if self.is_nullable(a) {
                    Gamma::alt(left, self.deriv(b, x)?)
                } else {
                    left
                }
            }
        })
    }

    fn inj(&self, g: &Gamma, x: Symbol, v: &ParseTree) -> Result<ParseTree, TreeError> {
        let mismatch = || TreeError::Shape {
            tree: v.to_string(),
            ty: format!("∂({g})/∂{x}"),
        };
        match g {
            Gamma::Re(r) => inj_regex(r, x, v).ok_or_else(mismatch),
            Gamma::Var(r) => Ok(ParseTree::fold(self.inj(self.rhs(r)?, x, v)?)),
            Gamma::Alt(a, b) => match v {
                ParseTree::Inl(u) => Ok(ParseTree::inl(self.inj(a, x, u)?)),
                ParseTree::Inr(u) => Ok(ParseTree::inr(self.inj(b, x, u)?)),
                _ => Err(mismatch()),
            },
            Gamma::Seq(a, b) => {
                if self.is_nullable(a) {
                    match v {
                        ParseTree::Inl(u) => match &**u {
                            ParseTree::Seq(v1, v2) => Ok(ParseTree::seq(self.inj(a, x, v1)?, (**v2).clone())),
                            _ => Err(mismatch()),
                        },
                        ParseTree::Inr(v2) => {
                            Ok(ParseTree::seq(self.mk_empty(a, &mut Vec::new())?, self.inj(b, x, v2)?))
                        }
                        _ => Err(mismatch()),
                    }
                } else {
                    match v {
                        ParseTree::Seq(v1, v2) => Ok(ParseTree::seq(self.inj(a, x, v1)?, (**v2).clone())),
                        _ => Err(mismatch()),
                    }
                }
            }
        }
    }
}

/// Empty tree for a nullable regex, preferring the left alternative.
fn mk_empty_regex(r: &Regex) -> ParseTree {
    match r {
        Regex::Eps => ParseTree::Eps,
        Regex::Star(_) => ParseTree::List(Vec::new()),
        Regex::Seq(a, b) => ParseTree::seq(mk_empty_regex(a), mk_empty_regex(b)),
        Regex::Alt(a, b) => {
            if nullable(a) {
                ParseTree::inl(mk_empty_regex(a))
            } else {
                ParseTree::inr(mk_empty_regex(b))
            }
        }
        Regex::Phi | Regex::Sym(_) => unreachable!("mk_empty_regex on a non-nullable regex"),
    }
}

fn inj_regex(r: &Regex, x: Symbol, v: &ParseTree) -> Option<ParseTree> {
    match (r, v) {
        (Regex::Sym(y), ParseTree::Eps) if *y == x => Some(ParseTree::Sym(x)),
        (Regex::Alt(a, _), ParseTree::Inl(u)) => Some(ParseTree::inl(inj_regex(a, x, u)?)),
        (Regex::Alt(_, b), ParseTree::Inr(u)) => Some(ParseTree::inr(inj_regex(b, x, u)?)),
        (Regex::Seq(a, b), _) => {
            if nullable(a) {
                match v {
                    ParseTree::Inl(u) => match &**u {
                        ParseTree::Seq(v1, v2) => Some(ParseTree::seq(inj_regex(a, x, v1)?, (**v2).clone())),
                        _ => None,
                    },
                    ParseTree::Inr(v2) => Some(ParseTree::seq(mk_empty_regex(a), inj_regex(b, x, v2)?)),
                    _ => None,
                }
            } else {
                match v {
                    ParseTree::Seq(v1, v2) => Some(ParseTree::seq(inj_regex(a, x, v1)?, (**v2).clone())),
                    _ => None,
                }
            }
        }
        (Regex::Star(a), ParseTree::Seq(v1, vs)) => match &**vs {
            ParseTree::List(rest) => {
                let mut items = vec![inj_regex(a, x, v1)?];
                items.extend(rest.iter().cloned());
                Some(ParseTree::List(items))
            }
            _ => None,
        },
        _ => None,
    }
}

pub fn mk_empty(sys: &impl RhsLookup, g: &Gamma) -> Result<ParseTree, TreeError> {
    Ctx::new(sys, g)?.mk_empty(g, &mut Vec::new())
}

pub fn deriv_rhs(sys: &EquationSystem, g: &Gamma, x: Symbol) -> Result<Gamma, TreeError> {
    check_guarded(sys)?;
    Ctx::new(sys, g)?.deriv(g, x)
}

pub fn inj(sys: &EquationSystem, g: &Gamma, x: Symbol, v: &ParseTree) -> Result<ParseTree, TreeError> {
    Ctx::new(sys, g)?.inj(g, x, v)
}

/// Derivative-based parser: differentiate by each symbol, build an empty
/// tree for the final derivative, then inject the symbols back.
pub fn parse(sys: &EquationSystem, g: &Gamma, w: &str) -> Result<ParseTree, TreeError> {
    check_guarded(sys)?;
    let ctx = Ctx::new(sys, g)?;
    let mut chain = vec![g.clone()];
    for x in w.chars() {
        let d = ctx.deriv(chain.last().unwrap(), x)?;
        chain.push(d);
    }
    let last = chain.last().unwrap();
    if !ctx.is_nullable(last) {
        return Err(TreeError::NoParse(w.to_string()));
    }
    let mut t = ctx.mk_empty(last, &mut Vec::new())?;
    let syms: Vec<Symbol> = w.chars().collect();
    for (gi, &x) in chain.iter().zip(syms.iter()).rev() {
        t = ctx.inj(gi, x, &t)?;
    }
    Ok(t)
}

type Items = Rc<Vec<(ParseTree, usize, usize)>>;
type StarItems = Rc<Vec<(Vec<ParseTree>, usize, usize)>>;

struct Enumerator<'a, L: RhsLookup> {
    sys: &'a L,
    memo: HashMap<(u8, usize, usize, usize), Items>,
    star_memo: HashMap<(usize, usize, usize), StarItems>,
}

impl<'a, L: RhsLookup> Enumerator<'a, L> {
    fn gamma(&mut self, g: &'a Gamma, len: usize, nodes: usize) -> Items {
        if nodes == 0 {
            return Rc::new(Vec::new());
        }
        if let Gamma::Re(r) = g {
            return self.regex(r, len, nodes);
        }
        let key = (0, g as *const Gamma as usize, len, nodes);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        match g {
            Gamma::Re(_) => unreachable!(),
            Gamma::Var(v) => {
                if let Some(rhs) = self.sys.rhs_gamma(v) {
                    for (t, l, n) in self.gamma(rhs, len, nodes - 1).iter() {
                        out.push((ParseTree::fold(t.clone()), *l, n + 1));
                    }
                }
            }
            Gamma::Alt(a, b) => {
                for (t, l, n) in self.gamma(a, len, nodes - 1).iter() {
                    out.push((ParseTree::inl(t.clone()), *l, n + 1));
                }
                for (t, l, n) in self.gamma(b, len, nodes - 1).iter() {
                    out.push((ParseTree::inr(t.clone()), *l, n + 1));
                }
            }
            Gamma::Seq(a, b) => {
                if nodes >= 3 {
                    let left = self.gamma(a, len, nodes - 2);
                    for (t1, l1, n1) in left.iter() {
                        for (t2, l2, n2) in self.gamma(b, len - l1, nodes - 1 - n1).iter() {
                            out.push((ParseTree::seq(t1.clone(), t2.clone()), l1 + l2, 1 + n1 + n2));
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    fn regex(&mut self, r: &'a Regex, len: usize, nodes: usize) -> Items {
        if nodes == 0 {
            return Rc::new(Vec::new());
        }
        let key = (1, r as *const Regex as usize, len, nodes);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        match r {
            Regex::Phi => {}
            Regex::Eps => out.push((ParseTree::Eps, 0, 1)),
            Regex::Sym(c) => {
                if len >= 1 {
                    out.push((ParseTree::Sym(*c), 1, 1));
                }
            }
            Regex::Alt(a, b) => {
                for (t, l, n) in self.regex(a, len, nodes - 1).iter() {
                    out.push((ParseTree::inl(t.clone()), *l, n + 1));
                }
                for (t, l, n) in self.regex(b, len, nodes - 1).iter() {
                    out.push((ParseTree::inr(t.clone()), *l, n + 1));
                }
            }
            Regex::Seq(a, b) => {
                if nodes >= 3 {
                    let left = self.regex(a, len, nodes - 2);
                    for (t1, l1, n1) in left.iter() {
                        for (t2, l2, n2) in self.regex(b, len - l1, nodes - 1 - n1).iter() {
                            out.push((ParseTree::seq(t1.clone(), t2.clone()), l1 + l2, 1 + n1 + n2));
                        }
                    }
                }
            }
            Regex::Star(a) => {
                for (items, l, n) in self.star_items(a, len, nodes - 1).iter() {
                    out.push((ParseTree::List(items.clone()), *l, n + 1));
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    /// Element sequences for a star body, with total nodes ≤ `nodes`.
    fn star_items(&mut self, body: &'a Regex, len: usize, nodes: usize) -> StarItems {
        let key = (body as *const Regex as usize, len, nodes);
        if let Some(v) = self.star_memo.get(&key) {
            return v.clone();
        }
        let mut out = vec![(Vec::new(), 0, 0)];
        if nodes > 0 {
            let heads = self.regex(body, len, nodes);
            for (t, l, n) in heads.iter() {
                for (rest, lr, nr) in self.star_items(body, len - l, nodes - n).iter() {
                    let mut items = Vec::with_capacity(rest.len() + 1);
                    items.push(t.clone());
                    items.extend(rest.iter().cloned());
                    out.push((items, l + lr, n + nr));
                }
            }
        }
        let out = Rc::new(out);
        self.star_memo.insert(key, out.clone());
        out
    }
}

/// All trees `v` with `E ⊢ v : g`, `|flatten v| ≤ max_len` and at most
/// `max_nodes` nodes, sorted by their s-expression.
pub fn enum_trees(sys: &impl RhsLookup, g: &Gamma, max_len: usize, max_nodes: usize) -> Vec<ParseTree> {
    let mut e = Enumerator {
        sys,
        memo: HashMap::new(),
        star_memo: HashMap::new(),
    };
    let items = e.gamma(g, max_len, max_nodes);
    let mut keyed: Vec<(String, ParseTree)> = items.iter().map(|(t, _, _)| (t.to_string(), t.clone())).collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Two distinct enumerated trees with the same flattening, if any.
pub fn ambiguity_witness(
    sys: &impl RhsLookup,
    g: &Gamma,
    max_len: usize,
    max_nodes: usize,
) -> Option<(ParseTree, ParseTree)> {
    let mut by_word: HashMap<String, ParseTree> = HashMap::new();
    for t in enum_trees(sys, g, max_len, max_nodes) {
        let w = flatten(&t);
        match by_word.get(&w) {
            Some(prev) if prev != &t => return Some((prev.clone(), t)),
            Some(_) => {}
            None => {
                by_word.insert(w, t);
            }
        }
    }
    None
}

pub fn is_ambiguous_bounded(sys: &impl RhsLookup, g: &Gamma, max_len: usize, max_nodes: usize) -> bool {
    ambiguity_witness(sys, g, max_len, max_nodes).is_some()
}

fn alt_leaves(r: &Regex) -> Vec<&Regex> {
    match r {
        Regex::Alt(a, b) => {
            let mut v = alt_leaves(a);
            v.extend(alt_leaves(b));
            v
        }
        _ => vec![r],
    }
}

/// Non-overlapping shape: every coefficient is a symbol or a sum of symbols,
/// the tail is a sum of ε, φ and symbols with at most one ε, and no symbol
/// starts two summands of one equation (a tail symbol `y` counts as `y·S`
/// with `S ≈ ε`).
pub fn is_non_overlapping(sys: &EquationSystem) -> bool {
    sys.equations().iter().all(|e| {
        let mut seen = BTreeSet::new();
        let coefs = e.rhs.self_coef.iter().chain(e.rhs.pairs.iter().map(|(c, _)| c));
        for c in coefs {
            for leaf in alt_leaves(c) {
                match leaf {
                    Regex::Sym(x) if seen.insert(*x) => {}
                    _ => return false,
                }
            }
        }
        let mut eps = 0;
        for leaf in alt_leaves(&e.rhs.tail) {
            match leaf {
                Regex::Phi => {}
                Regex::Eps => eps += 1,
                Regex::Sym(x) if seen.insert(*x) => {}
                _ => return false,
            }
        }
        eps <= 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::parse_system;
    use crate::regex_core::{lang_upto, re};

    fn rxy() -> (EquationSystem, Gamma) {
        let sys = parse_system("R = x R + y").unwrap();
        let v = sys.vars()[0].clone();
        (sys, Gamma::Var(v))
    }

    fn example_tree() -> ParseTree {
        tree_of_text("(fold (inl (seq (sym x) (fold (inr (sym y))))))").unwrap()
    }

    fn sx() -> ParseTree {
        ParseTree::Sym('x')
    }

    fn sy() -> ParseTree {
        ParseTree::Sym('y')
    }

    #[test]
    fn typecheck_examples() {
        let (sys, r) = rxy();
        assert!(typecheck(&sys, &example_tree(), &r));
        assert!(typecheck(&sys, &ParseTree::Eps, &Gamma::Re(Regex::Eps)));
        assert!(!typecheck(&sys, &ParseTree::inl(sx()), &Gamma::Re(re("y + x"))));
        assert!(!typecheck(&sys, &example_tree().unfolded(), &r));
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten(&example_tree()), "xy");
        assert_eq!(flatten(&ParseTree::List(vec![])), "");
        assert_eq!(flatten(&ParseTree::seq(sx(), sy())), "xy");
    }

    #[test]
    fn sexp_round_trip() {
        let t = ParseTree::List(vec![ParseTree::inl(ParseTree::seq(sx(), sy())), ParseTree::Eps]);
        assert_eq!(t.to_string(), "(list (inl (seq (sym x) (sym y))) eps)");
        assert_eq!(tree_of_text(&t.to_string()).unwrap(), t);
        assert!(tree_of_text("(seq eps)").is_err());
        assert!(tree_of_text("(sym X)").is_err());
        assert!(tree_of_text("eps eps").is_err());
    }

    #[test]
    fn mk_empty_examples() {
        let (sys, _) = rxy();
        assert_eq!(mk_empty(&sys, &Gamma::Re(re("x*"))).unwrap(), ParseTree::List(vec![]));
        assert_eq!(
            mk_empty(&sys, &Gamma::Re(re("x + ~"))).unwrap(),
            ParseTree::inr(ParseTree::Eps)
        );
        assert_eq!(
            mk_empty(&sys, &Gamma::Re(re("~ y*"))).unwrap(),
            ParseTree::seq(ParseTree::Eps, ParseTree::List(vec![]))
        );
        assert!(matches!(
            mk_empty(&sys, &Gamma::Re(re("x"))),
            Err(TreeError::NotNullable(_))
        ));
    }

    #[test]
    fn mk_empty_cycle_is_an_error() {
        let sys = parse_system("R = ~ R + ~").unwrap();
        let r = Gamma::Var(sys.vars()[0].clone());
        assert!(matches!(mk_empty(&sys, &r), Err(TreeError::Cycle(_))));
        assert!(matches!(parse(&sys, &r, ""), Err(TreeError::Unguarded(_))));
    }

    #[test]
    fn deriv_rhs_examples() {
        let (sys, r) = rxy();
        let v = sys.vars()[0].clone();
        let d = deriv_rhs(&sys, &r, 'x').unwrap();
        assert_eq!(
            d,
            Gamma::alt(Gamma::seq(Gamma::Re(Regex::Eps), Gamma::Var(v)), Gamma::Re(Regex::Phi))
        );
        assert_eq!(
            deriv_rhs(&sys, &Gamma::Re(Regex::Eps), 'x').unwrap(),
            Gamma::Re(Regex::Phi)
        );
        assert_eq!(
            deriv_rhs(&sys, &Gamma::Re(re("x + y")), 'y').unwrap(),
            Gamma::Re(re("! + ~"))
        );
    }

    #[test]
    fn inj_examples() {
        let (sys, r) = rxy();
        assert_eq!(inj(&sys, &Gamma::Re(re("x")), 'x', &ParseTree::Eps).unwrap(), sx());
        let star = Gamma::Re(re("x*"));
        let v = ParseTree::seq(ParseTree::Eps, ParseTree::List(vec![sx()]));
        assert_eq!(inj(&sys, &star, 'x', &v).unwrap(), ParseTree::List(vec![sx(), sx()]));
        // ∂R/∂y unfolds R once: (φ·R) + ε, whose tree is Inr(Eps).
        let d = deriv_rhs(&sys, &r, 'y').unwrap();
        let t = mk_empty(&sys, &d).unwrap();
        assert_eq!(t, ParseTree::inr(ParseTree::Eps));
        assert_eq!(inj(&sys, &r, 'y', &t).unwrap(), ParseTree::fold(ParseTree::inr(sy())));
    }

    #[test]
    fn parse_examples() {
        let (sys, r) = rxy();
        assert_eq!(parse(&sys, &r, "xy").unwrap(), example_tree());
        assert_eq!(parse(&sys, &Gamma::Re(re("x*")), "").unwrap(), ParseTree::List(vec![]));
        assert!(matches!(parse(&sys, &r, "yx"), Err(TreeError::NoParse(_))));
        let amb = Gamma::Re(re("(x y + x + y)*"));
        let t = parse(&sys, &amb, "xy").unwrap();
        assert_eq!(flatten(&t), "xy");
        assert!(enum_trees(&sys, &amb, 2, 16).contains(&t));
    }

    #[test]
    fn enum_trees_examples() {
        let (sys, _) = rxy();
        let amb = Gamma::Re(re("(x y + x + y)*"));
        let trees = enum_trees(&sys, &amb, 2, 16);
        let one = ParseTree::List(vec![ParseTree::inl(ParseTree::seq(sx(), sy()))]);
        let two = ParseTree::List(vec![
            ParseTree::inr(ParseTree::inl(sx())),
            ParseTree::inr(ParseTree::inr(sy())),
        ]);
        assert!(trees.contains(&one) && trees.contains(&two));
        assert!(enum_trees(&sys, &Gamma::Re(Regex::Phi), 3, 10).is_empty());
        assert_eq!(enum_trees(&sys, &Gamma::Re(re("x")), 1, 5), vec![sx()]);
        for t in &trees {
            assert!(typecheck(&sys, t, &amb));
            assert!(flatten(t).len() <= 2 && t.node_count() <= 16);
        }
    }

    #[test]
    fn enum_trees_through_variables() {
        let (sys, r) = rxy();
        let trees = enum_trees(&sys, &r, 3, 20);
        let words: BTreeSet<String> = trees.iter().map(flatten).collect();
        let v = sys.vars()[0].clone();
        let sol = crate::equations::solve(&sys, crate::equations::Strategy::Default).unwrap();
        assert_eq!(words, lang_upto(sol.get(&v).unwrap(), 3));
        assert!(trees.iter().all(|t| typecheck(&sys, t, &r)));
    }

    #[test]
    fn ambiguity_examples() {
        let (sys, _) = rxy();
        assert!(is_ambiguous_bounded(&sys, &Gamma::Re(re("(x y + x + y)*")), 2, 16));
        assert!(!is_ambiguous_bounded(&sys, &Gamma::Re(re("x*")), 4, 12));
        assert!(is_ambiguous_bounded(&sys, &Gamma::Re(re("x + x")), 1, 4));
    }

    #[test]
    fn non_overlapping_predicate() {
        assert!(is_non_overlapping(&parse_system("R = x R + y").unwrap()));
        assert!(!is_non_overlapping(&parse_system("R = x R + x").unwrap()));
        assert!(is_non_overlapping(
            &parse_system("R1 = x R1 + y R2 + ~\nR2 = y R1 + x R2 + ~").unwrap()
        ));
        assert!(!is_non_overlapping(
            &parse_system("R1 = x R1 + x R2 + ~\nR2 = ~").unwrap()
        ));
        assert!(!is_non_overlapping(&parse_system("R = x x R + ~").unwrap()));
        assert!(!is_non_overlapping(&parse_system("R = x R + ~ + ~").unwrap()));
    }
}
