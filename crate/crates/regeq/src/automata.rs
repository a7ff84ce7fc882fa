//! DFAs and NFAs, their characteristic equations, and DFA to regex
//! conversion by solving those equations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::{solve, EquationSystem, NormalRhs, Strategy, Var};
use crate::regex_core::{is_symbol, Alphabet, Regex, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("no states")]
    NoStates,
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("bad alphabet entry {0:?}")]
    BadSymbol(String),
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("start state {0:?} is not a state")]
    UnknownStart(String),
    #[error("accepting state {0:?} is not a state")]
    UnknownAccept(String),
    #[error("delta row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("missing transition from {state:?} on {symbol}")]
    Missing { state: String, symbol: Symbol },
    #[error("symbol {0:?} is not in the alphabet")]
    ForeignSymbol(char),
}

/// The JSON document shared by DFAs and NFAs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub start: String,
    pub accept: Vec<String>,
    pub delta: Vec<(String, String, String)>,
}

struct Header {
    states: Vec<String>,
    index: HashMap<String, usize>,
    alphabet: Alphabet,
    start: usize,
    accept: Vec<bool>,
}

fn header(doc: &AutomatonDoc) -> Result<Header, AutomatonError> {
    if doc.states.is_empty() {
        return Err(AutomatonError::NoStates);
    }
    let mut index = HashMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if index.insert(s.clone(), i).is_some() {
            return Err(AutomatonError::DuplicateState(s.clone()));
        }
    }
    let mut syms = Vec::new();
    for a in &doc.alphabet {
        let mut cs = a.chars();
        match (cs.next(), cs.next()) {
            (Some(c), None) if is_symbol(c) => syms.push(c),
            _ => return Err(AutomatonError::BadSymbol(a.clone())),
        }
    }
    let alphabet = Alphabet::new(syms).map_err(|_| AutomatonError::EmptyAlphabet)?;
    let start = *index
        .get(&doc.start)
        .ok_or_else(|| AutomatonError::UnknownStart(doc.start.clone()))?;
    let mut accept = vec![false; doc.states.len()];
    for a in &doc.accept {
        accept[*index.get(a).ok_or_else(|| AutomatonError::UnknownAccept(a.clone()))?] = true;
    }
    Ok(Header {
        states: doc.states.clone(),
        index,
        alphabet,
        start,
        accept,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub alphabet: Alphabet,
    /// `delta[q][k]`: successor of state `q` on the `k`-th alphabet symbol.
    pub delta: Vec<Vec<usize>>,
    pub start: usize,
    pub accept: Vec<bool>,
}

impl Dfa {
    pub fn from_doc(doc: &AutomatonDoc) -> Result<Dfa, AutomatonError> {
        let h = header(doc)?;
        let n = h.states.len();
        let mut delta: Vec<Vec<Option<usize>>> = vec![vec![None; h.alphabet.len()]; n];
        for (row, (p, a, q)) in doc.delta.iter().enumerate() {
            let err = |msg: String| AutomatonError::Row { row, msg };
            let pi = *h.index.get(p).ok_or_else(|| err(format!("unknown state {p:?}")))?;
            let qi = *h.index.get(q).ok_or_else(|| err(format!("unknown state {q:?}")))?;
            let mut cs = a.chars();
            let k = match (cs.next(), cs.next()) {
                (Some(c), None) => h.alphabet.symbols().iter().position(|&x| x == c),
                _ => None,
            }
            .ok_or_else(|| err(format!("symbol {a:?} is not in the alphabet")))?;
            if delta[pi][k].replace(qi).is_some() {
                return Err(err(format!("second transition from {p:?} on {a:?}")));
            }
        }
        let mut total = Vec::with_capacity(n);
        for (qi, row) in delta.into_iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (k, t) in row.into_iter().enumerate() {
                r.push(t.ok_or_else(|| AutomatonError::Missing {
                    state: h.states[qi].clone(),
                    symbol: h.alphabet.symbols()[k],
                })?);
            }
            total.push(r);
        }
        Ok(Dfa {
            states: h.states,
            alphabet: h.alphabet,
            delta: total,
            start: h.start,
            accept: h.accept,
        })
    }

    pub fn from_json(s: &str) -> Result<Dfa, AutomatonError> {
        let doc: AutomatonDoc = serde_json::from_str(s).map_err(|e| AutomatonError::Json(e.to_string()))?;
        Dfa::from_doc(&doc)
    }

    pub fn to_doc(&self) -> AutomatonDoc {
        let syms = self.alphabet.symbols();
        AutomatonDoc {
            states: self.states.clone(),
            alphabet: syms.iter().map(|c| c.to_string()).collect(),
            start: self.states[self.start].clone(),
            accept: (0..self.states.len())
                .filter(|&q| self.accept[q])
                .map(|q| self.states[q].clone())
                .collect(),
            delta: self
                .delta
                .iter()
                .enumerate()
                .flat_map(|(q, row)| {
                    row.iter()
                        .enumerate()
                        .map(move |(k, &t)| (self.states[q].clone(), syms[k].to_string(), self.states[t].clone()))
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn step(&self, q: usize, x: Symbol) -> Option<usize> {
        let k = self.alphabet.symbols().iter().position(|&c| c == x)?;
        Some(self.delta[q][k])
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[self.start] = true;
        let mut queue = VecDeque::from([self.start]);
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }
}

pub fn dfa_accepts(m: &Dfa, w: &str) -> Result<bool, AutomatonError> {
    let mut q = m.start;
    for x in w.chars() {
        q = m.step(q, x).ok_or(AutomatonError::ForeignSymbol(x))?;
    }
    Ok(m.accept[q])
}

/// Drops states unreachable from the start state.
pub fn prune(m: &Dfa) -> Dfa {
    let keep = m.reachable();
    let mut remap = vec![usize::MAX; m.len()];
    let mut states = Vec::new();
    for q in 0..m.len() {
        if keep[q] {
            remap[q] = states.len();
            states.push(m.states[q].clone());
        }
    }
    Dfa {
        states,
        alphabet: m.alphabet.clone(),
        delta: (0..m.len())
            .filter(|&q| keep[q])
            .map(|q| m.delta[q].iter().map(|&t| remap[t]).collect())
            .collect(),
        start: remap[m.start],
        accept: (0..m.len()).filter(|&q| keep[q]).map(|q| m.accept[q]).collect(),
    }
}

/// Variable assignment: the start state is `R1`, the others follow in
/// sorted order of their names.
pub fn state_vars(states: &[String], start: usize) -> Vec<Var> {
    let mut order: Vec<usize> = (0..states.len()).filter(|&q| q != start).collect();
    order.sort_by(|&a, &b| states[a].cmp(&states[b]));
    order.insert(0, start);
    let mut vars = vec![Var::numbered(0); states.len()];
    for (i, q) in order.into_iter().enumerate() {
        vars[q] = Var::numbered(i + 1);
    }
    vars
}

/// Builds a normal right-hand side from `(symbol, target)` moves given in
/// preference order; moves to one target share a coefficient summing their
/// symbols in the order given.
pub(crate) fn grouped_rhs(own: usize, moves: &[(Regex, usize)], vars: &[Var], tail: Regex) -> NormalRhs {
    let mut groups: Vec<(usize, Vec<Regex>)> = Vec::new();
    for (c, t) in moves {
        match groups.iter_mut().find(|(g, _)| g == t) {
            Some((_, cs)) => cs.push(c.clone()),
            None => groups.push((*t, vec![c.clone()])),
        }
    }
    let mut rhs = NormalRhs::pure(tail);
    for (t, cs) in groups {
        let coef = Regex::alt_all(cs);
        if t == own {
            rhs.self_coef = Some(coef);
        } else {
            rhs.pairs.push((coef, vars[t].clone()));
        }
    }
    rhs
}

fn final_tail(accepting: bool) -> Regex {
    if accepting {
        Regex::Eps
    } else {
        Regex::Phi
    }
}

fn ordered_system(alphabet: &Alphabet, vars: &[Var], eqs: Vec<NormalRhs>) -> EquationSystem {
    let mut eqs: Vec<(Var, NormalRhs)> = vars.iter().cloned().zip(eqs).collect();
    eqs.sort_by_key(|(v, _)| v.index);
    EquationSystem::new(alphabet.clone(), eqs).expect("automaton equations are well formed")
}

/// `R_q ≈ Σ x·R_δ(q,x) + f(q)` for every state `q`.
pub fn characteristic_equations(m: &Dfa) -> EquationSystem {
    let vars = state_vars(&m.states, m.start);
    let syms = m.alphabet.symbols();
    let eqs = (0..m.len())
        .map(|q| {
            let moves: Vec<(Regex, usize)> = syms
                .iter()
                .zip(&m.delta[q])
                .map(|(&x, &t)| (Regex::Sym(x), t))
                .collect();
            grouped_rhs(q, &moves, &vars, final_tail(m.accept[q]))
        })
        .collect();
    ordered_system(&m.alphabet, &vars, eqs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub states: Vec<String>,
    pub alphabet: Alphabet,
    /// `(from, symbol, to)`; `None` is an ε-transition.
    pub delta: Vec<(usize, Option<Symbol>, usize)>,
    pub start: usize,
    pub accept: Vec<bool>,
}

impl Nfa {
    pub fn from_doc(doc: &AutomatonDoc) -> Result<Nfa, AutomatonError> {
        let h = header(doc)?;
        let mut delta = Vec::new();
        for (row, (p, a, q)) in doc.delta.iter().enumerate() {
            let err = |msg: String| AutomatonError::Row { row, msg };
            let pi = *h.index.get(p).ok_or_else(|| err(format!("unknown state {p:?}")))?;
            let qi = *h.index.get(q).ok_or_else(|| err(format!("unknown state {q:?}")))?;
            let mut cs = a.chars();
            let sym = match (cs.next(), cs.next()) {
                (None, _) => None,
                (Some(c), None) if h.alphabet.contains(c) => Some(c),
                _ => return Err(err(format!("symbol {a:?} is not in the alphabet"))),
            };
            if !delta.contains(&(pi, sym, qi)) {
                delta.push((pi, sym, qi));
            }
        }
        Ok(Nfa {
            states: h.states,
            alphabet: h.alphabet,
            delta,
            start: h.start,
            accept: h.accept,
        })
    }

    pub fn from_json(s: &str) -> Result<Nfa, AutomatonError> {
        let doc: AutomatonDoc = serde_json::from_str(s).map_err(|e| AutomatonError::Json(e.to_string()))?;
        Nfa::from_doc(&doc)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn from_dfa(m: &Dfa) -> Nfa {
        let syms = m.alphabet.symbols();
        Nfa {
            states: m.states.clone(),
            alphabet: m.alphabet.clone(),
            delta: (0..m.len())
                .flat_map(|q| m.delta[q].iter().enumerate().map(move |(k, &t)| (q, Some(syms[k]), t)))
                .collect(),
            start: m.start,
            accept: m.accept.clone(),
        }
    }

    /// Simulation with ε-closures.
    pub fn accepts(&self, w: &str) -> bool {
        let closure = |set: BTreeSet<usize>| {
            let mut out = set.clone();
            let mut stack: Vec<usize> = set.into_iter().collect();
            while let Some(q) = stack.pop() {
                for &(p, a, t) in &self.delta {
                    if p == q && a.is_none() && out.insert(t) {
                        stack.push(t);
                    }
                }
            }
            out
        };
        let mut cur = closure(BTreeSet::from([self.start]));
        for x in w.chars() {
            let next = self
                .delta
                .iter()
                .filter(|(p, a, _)| cur.contains(p) && *a == Some(x))
                .map(|&(_, _, t)| t)
                .collect();
            cur = closure(next);
        }
        cur.iter().any(|&q| self.accept[q])
    }
}

/// One summand per transition, `ε·R_q'` for ε-transitions; moves to the
/// same target share a coefficient.
pub fn nfa_characteristic_equations(m: &Nfa) -> EquationSystem {
    let vars = state_vars(&m.states, m.start);
    let mut by_state: BTreeMap<usize, Vec<(Regex, usize)>> = BTreeMap::new();
    for &x in m.alphabet.symbols() {
        for &(p, a, t) in &m.delta {
            if a == Some(x) {
                by_state.entry(p).or_default().push((Regex::Sym(x), t));
            }
        }
    }
    for &(p, a, t) in &m.delta {
        if a.is_none() {
            by_state.entry(p).or_default().push((Regex::Eps, t));
        }
    }
    let eqs = (0..m.len())
        .map(|q| {
            grouped_rhs(
                q,
                by_state.get(&q).map_or(&[][..], Vec::as_slice),
                &vars,
                final_tail(m.accept[q]),
            )
        })
        .collect();
    ordered_system(&m.alphabet, &vars, eqs)
}

/// The solution component of the start state's variable.
pub fn dfa_to_regex(m: &Dfa, strategy: Strategy) -> Regex {
    let sys = characteristic_equations(m);
    let sol = solve(&sys, strategy).expect("characteristic equations are solvable");
    sol.get(&Var::numbered(1)).cloned().expect("start variable solved")
}

pub fn nfa_to_regex(m: &Nfa, strategy: Strategy) -> Regex {
    let sys = nfa_characteristic_equations(m);
    let sol = solve(&sys, strategy).expect("characteristic equations are solvable");
    sol.get(&Var::numbered(1)).cloned().expect("start variable solved")
}
