//! Coercion terms, their big-step evaluator, the coercion library for
//! Arden's rule, the E-rules and substitution contexts, and the coercive
//! solver that transports parse trees alongside equation solving.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::equations::{
    elimination_form, next_equation, normalize_gamma, Direction, ERule, EquationError, EquationSystem, EquivDerivation,
    Gamma, NormalRhs, PartialSolution, Side, Solution, Strategy, Var,
};
use crate::parse_trees::{GammaEnv, ParseTree};
use crate::regex_core::{Regex, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ctor {
    Eps,
    Sym(Symbol),
    Seq,
    Inl,
    Inr,
    Fold,
    Nil,
    Cons,
}

impl Ctor {
    pub fn arity(&self) -> usize {
        match self {
            Ctor::Eps | Ctor::Sym(_) | Ctor::Nil => 0,
            Ctor::Inl | Ctor::Inr | Ctor::Fold => 1,
            Ctor::Seq | Ctor::Cons => 2,
        }
    }
}

impl fmt::Display for Ctor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctor::Eps => write!(f, "eps"),
            Ctor::Sym(c) => write!(f, "sym {c}"),
            Ctor::Seq => write!(f, "seq"),
            Ctor::Inl => write!(f, "inl"),
            Ctor::Inr => write!(f, "inr"),
            Ctor::Fold => write!(f, "fold"),
            Ctor::Nil => write!(f, "nil"),
            Ctor::Cons => write!(f, "cons"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(String),
    Con(Ctor, Vec<Pattern>),
}

impl Pattern {
    fn bound(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Con(_, ps) => ps.iter().for_each(|p| p.bound(out)),
        }
    }

    pub fn is_linear(&self) -> bool {
        let mut names = Vec::new();
        self.bound(&mut names);
        let n = names.len();
        names.sort();
        names.dedup();
        names.len() == n
    }

    fn binds(&self, x: &str) -> bool {
        let mut names = Vec::new();
        self.bound(&mut names);
        names.iter().any(|n| n == x)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Con(k, ps) if ps.is_empty() && k.arity() == 0 && *k == Ctor::Eps => write!(f, "eps"),
            Pattern::Con(k, ps) => {
                write!(f, "({k}")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Value(ParseTree),
    Var(String),
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    Rec(String, Box<Term>),
    Case(Box<Term>, Vec<(Pattern, Term)>),
    /// Saturated constructor application.
    Con(Ctor, Vec<Term>),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Value(v) => write!(f, "{v}"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Lam(x, b) => write!(f, "(lam {x} {b})"),
            Term::App(a, b) => write!(f, "(app {a} {b})"),
            Term::Rec(x, b) => write!(f, "(rec {x} {b})"),
            Term::Case(s, bs) => {
                write!(f, "(case {s}")?;
                for (p, t) in bs {
                    write!(f, " ({p} {t})")?;
                }
                write!(f, ")")
            }
            Term::Con(k, args) if args.is_empty() && *k == Ctor::Eps => write!(f, "eps"),
            Term::Con(k, args) => {
                write!(f, "({k}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn lam(x: &str, body: Term) -> Term {
    Term::Lam(x.to_string(), Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn rec(f: &str, body: Term) -> Term {
    Term::Rec(f.to_string(), Box::new(body))
}

pub fn case(s: Term, branches: Vec<(Pattern, Term)>) -> Term {
    Term::Case(Box::new(s), branches)
}

pub fn con(k: Ctor, args: Vec<Term>) -> Term {
    Term::Con(k, args)
}

pub fn pv(x: &str) -> Pattern {
    Pattern::Var(x.to_string())
}

pub fn pc(k: Ctor, ps: Vec<Pattern>) -> Pattern {
    Pattern::Con(k, ps)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("no case branch matches {0}")]
    NoMatch(String),
    #[error("application of a non-function")]
    NotAFunction,
    #[error("expected a parse tree, found a function")]
    NotATree,
    #[error("ill-formed constructor application {0}")]
    BadConstruction(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Tree(ParseTree),
    Closure(String, Term),
}

fn subst(t: &Term, x: &str, s: &Term) -> Term {
    match t {
        Term::Value(_) => t.clone(),
        Term::Var(y) => {
            if y == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        Term::Lam(y, b) => {
            if y == x {
                t.clone()
            } else {
                Term::Lam(y.clone(), Box::new(subst(b, x, s)))
            }
        }
        Term::Rec(y, b) => {
            if y == x {
                t.clone()
            } else {
                Term::Rec(y.clone(), Box::new(subst(b, x, s)))
            }
        }
        Term::App(a, b) => app(subst(a, x, s), subst(b, x, s)),
        Term::Case(sc, bs) => case(
            subst(sc, x, s),
            bs.iter()
                .map(|(p, b)| (p.clone(), if p.binds(x) { b.clone() } else { subst(b, x, s) }))
                .collect(),
        ),
        Term::Con(k, args) => con(k.clone(), args.iter().map(|a| subst(a, x, s)).collect()),
    }
}

fn matches(p: &Pattern, v: &ParseTree, out: &mut Vec<(String, ParseTree)>) -> bool {
    match p {
        Pattern::Var(x) => {
            out.push((x.clone(), v.clone()));
            true
        }
        Pattern::Con(k, ps) => match (k, ps.as_slice(), v) {
            (Ctor::Eps, [], ParseTree::Eps) => true,
            (Ctor::Sym(c), [], ParseTree::Sym(d)) => c == d,
            (Ctor::Seq, [p1, p2], ParseTree::Seq(a, b)) => matches(p1, a, out) && matches(p2, b, out),
            (Ctor::Inl, [p1], ParseTree::Inl(a))
            | (Ctor::Inr, [p1], ParseTree::Inr(a))
            | (Ctor::Fold, [p1], ParseTree::Fold(a)) => matches(p1, a, out),
            (Ctor::Nil, [], ParseTree::List(vs)) => vs.is_empty(),
            (Ctor::Cons, [ph, pt], ParseTree::List(vs)) => match vs.split_first() {
                Some((h, t)) => matches(ph, h, out) && matches(pt, &ParseTree::List(t.to_vec()), out),
                None => false,
            },
            _ => false,
        },
    }
}

fn build(k: &Ctor, mut args: Vec<ParseTree>) -> Result<ParseTree, EvalError> {
    let bad = || EvalError::BadConstruction(k.to_string());
    if args.len() != k.arity() {
        return Err(bad());
    }
    Ok(match k {
        Ctor::Eps => ParseTree::Eps,
        Ctor::Sym(c) => ParseTree::Sym(*c),
        Ctor::Nil => ParseTree::List(Vec::new()),
        Ctor::Inl => ParseTree::inl(args.pop().unwrap()),
        Ctor::Inr => ParseTree::inr(args.pop().unwrap()),
        Ctor::Fold => ParseTree::fold(args.pop().unwrap()),
        Ctor::Seq => {
            let b = args.pop().unwrap();
            ParseTree::seq(args.pop().unwrap(), b)
        }
        Ctor::Cons => {
            let ParseTree::List(mut tail) = args.pop().unwrap() else {
                return Err(bad());
            };
            tail.insert(0, args.pop().unwrap());
            ParseTree::List(tail)
        }
    })
}

/// Big-step evaluation of a closed term.
pub fn eval_term(t: &Term) -> Result<Value, EvalError> {
    match t {
        Term::Value(v) => Ok(Value::Tree(v.clone())),
        Term::Var(x) => Err(EvalError::Unbound(x.clone())),
        Term::Lam(x, b) => Ok(Value::Closure(x.clone(), (**b).clone())),
        Term::Rec(f, b) => eval_term(&subst(b, f, t)),
        Term::App(f, a) => {
            let Value::Closure(x, body) = eval_term(f)? else {
                return Err(EvalError::NotAFunction);
            };
            let arg = eval_tree(a)?;
            eval_term(&subst(&body, &x, &Term::Value(arg)))
        }
        Term::Case(s, branches) => {
            let v = eval_tree(s)?;
            for (p, body) in branches {
                let mut binds = Vec::new();
                if matches(p, &v, &mut binds) {
                    let body = binds
                        .iter()
                        .fold(body.clone(), |b, (x, u)| subst(&b, x, &Term::Value(u.clone())));
                    return eval_term(&body);
                }
            }
            Err(EvalError::NoMatch(v.to_string()))
        }
        Term::Con(k, args) => {
            let vs = args.iter().map(eval_tree).collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Tree(build(k, vs)?))
        }
    }
}

fn eval_tree(t: &Term) -> Result<ParseTree, EvalError> {
    match eval_term(t)? {
        Value::Tree(v) => Ok(v),
        Value::Closure(..) => Err(EvalError::NotATree),
    }
}

/// Applies the coercion `c` to the tree `v`.
pub fn eval(c: &Term, v: &ParseTree) -> Result<ParseTree, EvalError> {
    eval_tree(&app(c.clone(), Term::Value(v.clone())))
}

pub fn identity() -> Term {
    lam("v", var("v"))
}

/// `λv. g (f v)`: `f` first, then `g`.
pub fn compose(f: Term, g: Term) -> Term {
    lam("v", app(g, app(f, var("v"))))
}

/// Composition of a sequence, applied left to right.
pub fn compose_all(fs: Vec<Term>) -> Term {
    if fs.is_empty() {
        return identity();
    }
    let body = fs.into_iter().fold(var("v"), |acc, f| app(f, acc));
    lam("v", body)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectivePair {
    pub forward: Term,
    pub inverse: Term,
    pub domain: Gamma,
    pub codomain: Gamma,
}

impl BijectivePair {
    pub fn apply(&self, v: &ParseTree) -> Result<ParseTree, EvalError> {
        eval(&self.forward, v)
    }

    pub fn unapply(&self, v: &ParseTree) -> Result<ParseTree, EvalError> {
        eval(&self.inverse, v)
    }
}

fn seq_p(a: Pattern, b: Pattern) -> Pattern {
    pc(Ctor::Seq, vec![a, b])
}

fn seq_t(a: Term, b: Term) -> Term {
    con(Ctor::Seq, vec![a, b])
}

fn inl_p(a: Pattern) -> Pattern {
    pc(Ctor::Inl, vec![a])
}

fn inr_p(a: Pattern) -> Pattern {
    pc(Ctor::Inr, vec![a])
}

fn inl_t(a: Term) -> Term {
    con(Ctor::Inl, vec![a])
}

fn inr_t(a: Term) -> Term {
    con(Ctor::Inr, vec![a])
}

fn fold_t(a: Term) -> Term {
    con(Ctor::Fold, vec![a])
}

/// Arden coercion for `R ≈ s·R + α`: trees of `R` to trees of `s*·α`.
pub fn arden_coercion(r: &Var, s: &Regex, alpha: &Gamma) -> BijectivePair {
    let forward = rec(
        "f",
        lam(
            "x",
            case(
                var("x"),
                vec![
                    (
                        pc(Ctor::Fold, vec![inr_p(pv("u"))]),
                        seq_t(con(Ctor::Nil, vec![]), var("u")),
                    ),
                    (
                        pc(Ctor::Fold, vec![inl_p(seq_p(pv("u"), pv("v")))]),
                        case(
                            app(var("f"), var("v")),
                            vec![(
                                seq_p(pv("us"), pv("u2")),
                                seq_t(con(Ctor::Cons, vec![var("u"), var("us")]), var("u2")),
                            )],
                        ),
                    ),
                ],
            ),
        ),
    );
    let inverse = rec(
        "g",
        lam(
            "x",
            case(
                var("x"),
                vec![
                    (seq_p(pc(Ctor::Nil, vec![]), pv("u")), fold_t(inr_t(var("u")))),
                    (
                        seq_p(pc(Ctor::Cons, vec![pv("v"), pv("vs")]), pv("u")),
                        fold_t(inl_t(seq_t(var("v"), app(var("g"), seq_t(var("vs"), var("u")))))),
                    ),
                ],
            ),
        ),
    );
    BijectivePair {
        forward,
        inverse,
        domain: Gamma::Var(r.clone()),
        codomain: Gamma::seq(Gamma::Re(Regex::star(s.clone())), alpha.clone()),
    }
}

/// Coercion for one rule applied at the root.
pub fn rule_coercion(rule: ERule, dir: Direction) -> Term {
    use Direction::*;
    use ERule::*;
    let br = |p: Pattern, t: Term| (p, t);
    let branches = match (rule, dir) {
        (E1, Forward) => vec![
            br(seq_p(pv("u"), inl_p(pv("w"))), inl_t(seq_t(var("u"), var("w")))),
            br(seq_p(pv("u"), inr_p(pv("w"))), inr_t(seq_t(var("u"), var("w")))),
        ],
        (E1, Backward) => vec![
            br(inl_p(seq_p(pv("u"), pv("w"))), seq_t(var("u"), inl_t(var("w")))),
            br(inr_p(seq_p(pv("u"), pv("w"))), seq_t(var("u"), inr_t(var("w")))),
        ],
        (E2, Forward) => vec![br(
            seq_p(pv("a"), seq_p(pv("b"), pv("c"))),
            seq_t(seq_t(var("a"), var("b")), var("c")),
        )],
        (E2, Backward) => vec![br(
            seq_p(seq_p(pv("a"), pv("b")), pv("c")),
            seq_t(var("a"), seq_t(var("b"), var("c"))),
        )],
        (E3, Forward) => vec![
            br(inl_p(pv("a")), inl_t(inl_t(var("a")))),
            br(inr_p(inl_p(pv("b"))), inl_t(inr_t(var("b")))),
            br(inr_p(inr_p(pv("c"))), inr_t(var("c"))),
        ],
        (E3, Backward) => vec![
            br(inl_p(inl_p(pv("a"))), inl_t(var("a"))),
            br(inl_p(inr_p(pv("b"))), inr_t(inl_t(var("b")))),
            br(inr_p(pv("c")), inr_t(inr_t(var("c")))),
        ],
        (E4, Forward) => vec![
            br(inl_p(seq_p(pv("a"), pv("b"))), seq_t(inl_t(var("a")), var("b"))),
            br(inr_p(seq_p(pv("a"), pv("b"))), seq_t(inr_t(var("a")), var("b"))),
        ],
        (E4, Backward) => vec![
            br(seq_p(inl_p(pv("a")), pv("b")), inl_t(seq_t(var("a"), var("b")))),
            br(seq_p(inr_p(pv("a")), pv("b")), inr_t(seq_t(var("a"), var("b")))),
        ],
        (E5, _) => vec![br(inl_p(pv("a")), inr_t(var("a"))), br(inr_p(pv("b")), inl_t(var("b")))],
    };
    lam("x", case(var("x"), branches))
}

/// Lifts `f` to the hole at `path` inside nested sums.
pub fn navigate(path: &[Side], f: Term) -> Term {
    path.iter().rev().fold(f, |inner, side| {
        let branches = match side {
            Side::Left => vec![
                (inl_p(pv("a")), inl_t(app(inner, var("a")))),
                (inr_p(pv("b")), inr_t(var("b"))),
            ],
            Side::Right => vec![
                (inl_p(pv("a")), inl_t(var("a"))),
                (inr_p(pv("b")), inr_t(app(inner, var("b")))),
            ],
        };
        lam("x", case(var("x"), branches))
    })
}

/// Compiles an equivalence derivation into a coercion pair.
pub fn equiv_coercion(d: &EquivDerivation) -> BijectivePair {
    let forward = compose_all(
        d.steps
            .iter()
            .map(|s| navigate(&s.path, rule_coercion(s.rule, s.dir)))
            .collect(),
    );
    let inverse = compose_all(
        d.steps
            .iter()
            .rev()
            .map(|s| navigate(&s.path, rule_coercion(s.rule, s.dir.flip())))
            .collect(),
    );
    BijectivePair {
        forward,
        inverse,
        domain: d.source.clone(),
        codomain: d.target.clone(),
    }
}

/// Multi-hole substitution context over right-linear expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubstCtx {
    /// `⟨⟩`
    Hole,
    /// `r·δ`
    SeqR(Box<SubstCtx>),
    /// `δ1 + δ2`
    Both(Box<SubstCtx>, Box<SubstCtx>),
    /// `δ + α`
    Left(Box<SubstCtx>),
    /// `α + δ`
    Right(Box<SubstCtx>),
}

/// The context whose holes are exactly the occurrences of `v` in `g`.
pub fn subst_context(g: &Gamma, v: &Var) -> Option<SubstCtx> {
    match g {
        Gamma::Re(_) => None,
        Gamma::Var(w) => (w == v).then_some(SubstCtx::Hole),
        Gamma::Seq(a, b) => {
            debug_assert!(!a.mentions(v), "variable in a left factor");
            subst_context(b, v).map(|d| SubstCtx::SeqR(Box::new(d)))
        }
        Gamma::Alt(a, b) => match (subst_context(a, v), subst_context(b, v)) {
            (Some(l), Some(r)) => Some(SubstCtx::Both(Box::new(l), Box::new(r))),
            (Some(l), None) => Some(SubstCtx::Left(Box::new(l))),
            (None, Some(r)) => Some(SubstCtx::Right(Box::new(r))),
            (None, None) => None,
        },
    }
}

/// Forward and inverse coercions between trees of `δ⟨R⟩` and `δ⟨α⟩`.
pub fn subst_coercion(delta: &SubstCtx) -> (Term, Term) {
    (subst_term(delta, true), subst_term(delta, false))
}

fn subst_term(delta: &SubstCtx, fwd: bool) -> Term {
    let x = || var("x");
    match delta {
        SubstCtx::Hole => {
            if fwd {
                lam("x", case(x(), vec![(pc(Ctor::Fold, vec![pv("v")]), var("v"))]))
            } else {
                lam("v", fold_t(var("v")))
            }
        }
        SubstCtx::SeqR(inner) if **inner == SubstCtx::Hole => {
            if fwd {
                lam(
                    "x",
                    case(
                        x(),
                        vec![(seq_p(pv("u"), pc(Ctor::Fold, vec![pv("v")])), seq_t(var("u"), var("v")))],
                    ),
                )
            } else {
                lam(
                    "x",
                    case(x(), vec![(seq_p(pv("u"), pv("v")), seq_t(var("u"), fold_t(var("v"))))]),
                )
            }
        }
        SubstCtx::SeqR(inner) => lam(
            "x",
            case(
                x(),
                vec![(
                    seq_p(pv("u"), pv("v")),
                    seq_t(var("u"), app(subst_term(inner, fwd), var("v"))),
                )],
            ),
        ),
        SubstCtx::Both(l, r) => lam(
            "x",
            case(
                x(),
                vec![
                    (inl_p(pv("v")), inl_t(app(subst_term(l, fwd), var("v")))),
                    (inr_p(pv("v")), inr_t(app(subst_term(r, fwd), var("v")))),
                ],
            ),
        ),
        SubstCtx::Left(l) => lam(
            "x",
            case(
                x(),
                vec![
                    (inl_p(pv("v")), inl_t(app(subst_term(l, fwd), var("v")))),
                    (inr_p(pv("v")), inr_t(var("v"))),
                ],
            ),
        ),
        SubstCtx::Right(r) => lam(
            "x",
            case(
                x(),
                vec![
                    (inl_p(pv("v")), inl_t(var("v"))),
                    (inr_p(pv("v")), inr_t(app(subst_term(r, fwd), var("v")))),
                ],
            ),
        ),
    }
}

/// Substitution coercion pair for replacing `v` by `alpha` in `g`.
pub fn subst_pair(g: &Gamma, v: &Var, alpha: &Gamma) -> Option<BijectivePair> {
    let ctx = subst_context(g, v)?;
    let (forward, inverse) = subst_coercion(&ctx);
    Some(BijectivePair {
        forward,
        inverse,
        domain: g.clone(),
        codomain: g.substitute(v, alpha),
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoercionError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error("tree {tree} does not fit {ty}")]
    Transport { tree: String, ty: String },
}

/// Per-variable coercions for one solver step: content of the old
/// right-hand side to content of the new one.
type Changes = HashMap<Var, (Term, Gamma)>;

fn transport(t: &ParseTree, g: &Gamma, env: &GammaEnv, changed: &Changes) -> Result<ParseTree, CoercionError> {
    let mismatch = || CoercionError::Transport {
        tree: t.to_string(),
        ty: g.to_string(),
    };
    match (g, t) {
        (Gamma::Re(_), _) => Ok(t.clone()),
        (Gamma::Var(x), ParseTree::Fold(w)) => match changed.get(x) {
            Some((c, new_g)) => Ok(ParseTree::fold(transport(&eval(c, w)?, new_g, env, changed)?)),
            None => {
                let rhs = env.0.get(x).ok_or_else(mismatch)?;
                Ok(ParseTree::fold(transport(w, rhs, env, changed)?))
            }
        },
        (Gamma::Seq(a, b), ParseTree::Seq(u, w)) => Ok(ParseTree::seq(
            transport(u, a, env, changed)?,
            transport(w, b, env, changed)?,
        )),
        (Gamma::Alt(a, _), ParseTree::Inl(u)) => Ok(ParseTree::inl(transport(u, a, env, changed)?)),
        (Gamma::Alt(_, b), ParseTree::Inr(u)) => Ok(ParseTree::inr(transport(u, b, env, changed)?)),
        _ => Err(mismatch()),
    }
}

/// Solves `sys` with the default strategy while transporting `trees`.
pub fn coercive_solve(
    sys: &EquationSystem,
    trees: &BTreeMap<Var, ParseTree>,
) -> Result<(Solution, BTreeMap<Var, ParseTree>), CoercionError> {
    coercive_solve_with(sys, Strategy::Default, trees)
}

/// Coercive solving: each input tree (typed at its variable) ends up typed
/// at that variable's solution regex, with the same flattening.
pub fn coercive_solve_with(
    sys: &EquationSystem,
    strategy: Strategy,
    trees: &BTreeMap<Var, ParseTree>,
) -> Result<(Solution, BTreeMap<Var, ParseTree>), CoercionError> {
    let mut cur = sys.clone();
    let mut acc: PartialSolution = Vec::new();
    let mut eq_trees: BTreeMap<Var, ParseTree> = trees.clone();
    let mut acc_trees: BTreeMap<Var, ParseTree> = BTreeMap::new();
    while !cur.is_empty() {
        let v = next_equation(&cur, strategy);
        let eq = cur.get(&v).expect("picked variable has an equation").clone();
        let alpha = elimination_form(&eq);
        let mut env = GammaEnv::from(&cur);

        if let Some(s) = &eq.rhs.self_coef {
            let fa = arden_coercion(&v, s, &eq.rhs.render_rest());
            let step = lam("w", app(fa.forward, fold_t(var("w"))));
            let changed = Changes::from([(v.clone(), (step, alpha.clone()))]);
            let types: BTreeMap<Var, Gamma> = acc.iter().cloned().collect();
            let mut next_eq = BTreeMap::new();
            for (x, t) in &eq_trees {
                next_eq.insert(x.clone(), transport(t, &Gamma::Var(x.clone()), &env, &changed)?);
            }
            eq_trees = next_eq;
            for (x, t) in acc_trees.iter_mut() {
                *t = transport(t, &types[x], &env, &changed)?;
            }
            env.0.insert(v.clone(), alpha.clone());
        }

        let mut changed = Changes::new();
        let mut next_eqs: Vec<(Var, NormalRhs)> = Vec::new();
        for e in cur.equations() {
            if e.var == v {
                continue;
            }
            if e.rhs.mentions(&v) {
                let ctx = subst_context(e.gamma(), &v).expect("equation mentions the variable");
                let (sub, _) = subst_coercion(&ctx);
                let (n, d) = normalize_gamma(&e.gamma().substitute(&v, &alpha), &e.var)?;
                let rendered = n.render(&e.var);
                debug_assert_eq!(d.target, rendered);
                changed.insert(e.var.clone(), (compose(sub, equiv_coercion(&d).forward), rendered));
                next_eqs.push((e.var.clone(), n));
            } else {
                next_eqs.push((e.var.clone(), e.rhs.clone()));
            }
        }

        let mut next_eq_trees = BTreeMap::new();
        for (x, t) in &eq_trees {
            if x == &v {
                let ParseTree::Fold(w) = t else {
                    return Err(CoercionError::Transport {
                        tree: t.to_string(),
                        ty: v.to_string(),
                    });
                };
                acc_trees.insert(v.clone(), transport(w, &alpha, &env, &changed)?);
            } else {
                next_eq_trees.insert(x.clone(), transport(t, &Gamma::Var(x.clone()), &env, &changed)?);
            }
        }
        let mut next_acc = Vec::with_capacity(acc.len() + 1);
        for (x, g) in &acc {
            let new_g = g.substitute(&v, &alpha);
            if let Some(t) = acc_trees.get_mut(x) {
                let t1 = match subst_context(g, &v) {
                    Some(ctx) => eval(&subst_coercion(&ctx).0, t)?,
                    None => t.clone(),
                };
                *t = transport(&t1, &new_g, &env, &changed)?;
            }
            next_acc.push((x.clone(), new_g));
        }
        next_acc.push((v.clone(), alpha.clone()));
        acc = next_acc;
        eq_trees = next_eq_trees;
        cur = EquationSystem::new(cur.alphabet.clone(), next_eqs)?;
    }
    let mut sol = BTreeMap::new();
    for (v, g) in acc {
        sol.insert(v, g.to_regex().expect("closed solution"));
    }
    Ok((Solution(sol), acc_trees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::{normalize, parse_system, solve, Rhs};
    use crate::parse_trees::{enum_trees, flatten, parse, tree_of_text, typecheck, typecheck_regex};
    use crate::regex_core::re;

    fn t(s: &str) -> ParseTree {
        tree_of_text(s).unwrap()
    }

    fn rxy() -> (EquationSystem, Var) {
        let sys = parse_system("R = x R + y").unwrap();
        let v = sys.vars()[0].clone();
        (sys, v)
    }

    #[test]
    fn eval_examples() {
        let (sys, r) = rxy();
        let e = sys.get(&r).unwrap();
        let fa = arden_coercion(&r, &re("x"), &e.rhs.render_rest());
        let u = ParseTree::Sym('y');
        assert_eq!(
            fa.apply(&t("(fold (inr (sym y)))")).unwrap(),
            ParseTree::seq(ParseTree::List(vec![]), u.clone())
        );
        let ex = t("(fold (inl (seq (sym x) (fold (inr (sym y))))))");
        assert_eq!(fa.apply(&ex).unwrap(), t("(seq (list (sym x)) (sym y))"));
        assert_eq!(
            fa.unapply(&t("(seq (list) (sym y))")).unwrap(),
            t("(fold (inr (sym y)))")
        );
        assert_eq!(fa.unapply(&t("(seq (list (sym x)) (sym y))")).unwrap(), ex);
        assert_eq!(eval(&identity(), &ex).unwrap(), ex);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(
            eval(&rule_coercion(ERule::E5, Direction::Forward), &ParseTree::Eps),
            Err(EvalError::NoMatch(_))
        ));
        assert!(matches!(eval_term(&var("z")), Err(EvalError::Unbound(_))));
        assert!(matches!(
            eval(&lam("v", app(var("v"), var("v"))), &ParseTree::Eps),
            Err(EvalError::NotAFunction)
        ));
    }

    #[test]
    fn arden_nesting_depth_matches_list_length() {
        let (sys, r) = rxy();
        let fa = arden_coercion(&r, &re("x"), &sys.get(&r).unwrap().rhs.render_rest());
        for n in 0..=3 {
            let mut tree = t("(fold (inr (sym y)))");
            for _ in 0..n {
                tree = ParseTree::fold(ParseTree::inl(ParseTree::seq(ParseTree::Sym('x'), tree)));
            }
            let out = fa.apply(&tree).unwrap();
            match &out {
                ParseTree::Seq(l, _) => assert_eq!(**l, ParseTree::List(vec![ParseTree::Sym('x'); n])),
                _ => panic!("unexpected {out}"),
            }
        }
        let trees = enum_trees(&sys, &Gamma::Var(r.clone()), 4, 24);
        assert_eq!(trees.len(), 4);
        for tr in trees {
            let out = fa.apply(&tr).unwrap();
            assert!(typecheck(&sys, &out, &fa.codomain));
            assert_eq!(fa.unapply(&out).unwrap(), tr);
        }
    }

    #[test]
    fn e1_examples() {
        let f = rule_coercion(ERule::E1, Direction::Forward);
        let g = rule_coercion(ERule::E1, Direction::Backward);
        let u = ParseTree::Sym('x');
        let w = ParseTree::Sym('y');
        let a = ParseTree::seq(u.clone(), ParseTree::inl(w.clone()));
        let b = ParseTree::inl(ParseTree::seq(u.clone(), w.clone()));
        assert_eq!(eval(&f, &a).unwrap(), b);
        assert_eq!(eval(&g, &b).unwrap(), a);
        let d = EquivDerivation::identity(Gamma::Re(re("x")));
        let p = equiv_coercion(&d);
        assert_eq!(p.apply(&u).unwrap(), u);
        assert_eq!(p.unapply(&u).unwrap(), u);
    }

    #[test]
    fn subst_context_examples() {
        let f = subst_coercion(&SubstCtx::SeqR(Box::new(SubstCtx::Hole))).0;
        assert_eq!(f.to_string(), "(lam x (case x ((seq u (fold v)) (seq u v))))");
        let (u, v) = (ParseTree::Sym('x'), ParseTree::Sym('y'));
        assert_eq!(
            eval(&f, &ParseTree::seq(u.clone(), ParseTree::fold(v.clone()))).unwrap(),
            ParseTree::seq(u, v.clone())
        );
        let (l, _) = subst_coercion(&SubstCtx::Left(Box::new(SubstCtx::Hole)));
        assert_eq!(eval(&l, &ParseTree::inr(v.clone())).unwrap(), ParseTree::inr(v.clone()));
        let (r, _) = subst_coercion(&SubstCtx::Right(Box::new(SubstCtx::Hole)));
        assert_eq!(eval(&r, &ParseTree::inl(v.clone())).unwrap(), ParseTree::inl(v));
    }

    #[test]
    fn normalization_coercion_round_trips() {
        let sys = parse_system("R1 = x R1 + y R2 + ~\nR2 = y R1 + x R2 + ~").unwrap();
        let vars = sys.vars();
        let rhs = Rhs::sum_all(vec![
            Rhs::Coef(re("x"), vars[1].clone()),
            Rhs::Pure(re("y")),
            Rhs::Coef(re("y"), vars[0].clone()),
            Rhs::Coef(re("x y"), vars[1].clone()),
        ]);
        let (_, d) = normalize(&rhs, &vars[0]).unwrap();
        assert!(d.steps.len() > 3);
        let p = equiv_coercion(&d);
        let dom = enum_trees(&sys, &p.domain, 4, 16);
        assert!(!dom.is_empty());
        for v in &dom {
            let w = p.apply(v).unwrap();
            assert!(typecheck(&sys, &w, &p.codomain));
            assert_eq!(flatten(&w), flatten(v));
            assert_eq!(&p.unapply(&w).unwrap(), v);
        }
        for w in enum_trees(&sys, &p.codomain, 4, 16) {
            assert_eq!(p.apply(&p.unapply(&w).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn coercive_solve_single_equation() {
        let (sys, r) = rxy();
        let ex = t("(fold (inl (seq (sym x) (fold (inr (sym y))))))");
        let (sol, out) = coercive_solve(&sys, &BTreeMap::from([(r.clone(), ex)])).unwrap();
        assert_eq!(sol.get(&r), Some(&re("x* y")));
        assert_eq!(out[&r], t("(seq (list (sym x)) (sym y))"));
        assert_eq!(parse(&sys, &Gamma::Re(re("x* y")), "xy").unwrap(), out[&r]);
    }

    #[test]
    fn coercive_solve_mutual_pair() {
        let sys = parse_system("R1 = x R1 + y R2 + ~\nR2 = y R1 + x R2 + ~").unwrap();
        let vars = sys.vars();
        for w in ["xyx", "", "yy", "xxyxy"] {
            let trees: BTreeMap<Var, ParseTree> = vars
                .iter()
                .map(|v| (v.clone(), parse(&sys, &Gamma::Var(v.clone()), w).unwrap()))
                .collect();
            let (sol, out) = coercive_solve(&sys, &trees).unwrap();
            assert_eq!(sol, solve(&sys, Strategy::Default).unwrap());
            for v in &vars {
                assert!(typecheck_regex(&out[v], sol.get(v).unwrap()), "{w} {v}");
                assert_eq!(flatten(&out[v]), w);
            }
        }
    }
}
