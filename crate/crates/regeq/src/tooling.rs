//! Seeded generators, the strategy benchmark, and the command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use thiserror::Error;

use crate::automata::{
    dfa_accepts, dfa_to_regex, grouped_rhs, nfa_to_regex, prune, AutomatonDoc, AutomatonError, Dfa, Nfa,
};
use crate::derivatives::{descendants, DerivError};
use crate::equations::{
    check_solution, parse_system, solve, EquationError, EquationSystem, Gamma, NormalRhs, Strategy, Var,
};
use crate::parse_trees::{ambiguity_witness, parse, TreeError};
use crate::reg_ops::{apply_op, shuffle_langs, OpError, PairOp, ProductConfig, ProductMode};
use crate::regex_core::{
    alphabetic_width, lang_upto, regex_of_text, simp, Alphabet, Regex, SimilarityRules, SyntaxError,
};

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Uniform total transition function; each state accepts with `accept_prob`.
/// States are `q0 … q{n-1}` with start `q0`.
pub fn random_dfa(states: usize, alphabet: &Alphabet, accept_prob: f64, seed: u64) -> Dfa {
    assert!(states >= 1, "random_dfa needs at least one state");
    let mut g = rng(seed);
    let mut delta = Vec::with_capacity(states);
    let mut accept = Vec::with_capacity(states);
    for _ in 0..states {
        delta.push((0..alphabet.len()).map(|_| g.gen_range(0..states)).collect());
        accept.push(g.gen_bool(accept_prob));
    }
    Dfa {
        states: (0..states).map(|q| format!("q{q}")).collect(),
        alphabet: alphabet.clone(),
        delta,
        start: 0,
        accept,
    }
}

/// A random regex with exactly `width` symbol occurrences (`width ≥ 1`).
pub fn random_regex(g: &mut impl Rng, alphabet: &Alphabet, width: usize) -> Regex {
    let syms = alphabet.symbols();
    let r = if width <= 1 {
        Regex::Sym(syms[g.gen_range(0..syms.len())])
    } else {
        let k = g.gen_range(1..width);
        let (a, b) = (random_regex(g, alphabet, k), random_regex(g, alphabet, width - k));
        if g.gen_bool(0.5) {
            Regex::alt(a, b)
        } else {
            Regex::seq(a, b)
        }
    };
    if g.gen_bool(0.25) {
        Regex::star(r)
    } else {
        r
    }
}

/// A random regex of width `1..=max_width`, occasionally ε or φ.
pub fn random_operand(g: &mut impl Rng, alphabet: &Alphabet, max_width: usize) -> Regex {
    match g.gen_range(0..20) {
        0 => Regex::Eps,
        1 => Regex::Phi,
        _ => {
            let w = g.gen_range(1..=max_width);
            random_regex(g, alphabet, w)
        }
    }
}

/// A random system with single-symbol coefficients that passes the
/// non-overlapping predicate. `R1` is the designated start variable.
pub fn random_non_overlapping_system(g: &mut impl Rng, n: usize, alphabet: &Alphabet) -> EquationSystem {
    let vars: Vec<Var> = (1..=n).map(Var::numbered).collect();
    let mut eqs = Vec::with_capacity(n);
    for i in 0..n {
        let mut moves = Vec::new();
        let mut tail = Vec::new();
        for &x in alphabet.symbols() {
            match g.gen_range(0..6) {
                0 => {}
                1 => tail.push(Regex::Sym(x)),
                _ => moves.push((Regex::Sym(x), g.gen_range(0..n))),
            }
        }
        if g.gen_bool(0.5) {
            tail.push(Regex::Eps);
        }
        let tail = if tail.is_empty() {
            Regex::Phi
        } else {
            Regex::alt_all(tail)
        };
        eqs.push((vars[i].clone(), grouped_rhs(i, &moves, &vars, tail)));
    }
    EquationSystem::new(Alphabet::new(alphabet.symbols().iter().copied()).unwrap(), eqs).unwrap()
}

fn small_regex(g: &mut impl Rng, alphabet: &Alphabet) -> Regex {
    let w = g.gen_range(1..=2);
    random_regex(g, alphabet, w)
}

/// A random system in strict order: equation `i` mentions only itself and
/// earlier variables, and every coefficient has a non-empty language.
pub fn random_strict_order_system(g: &mut impl Rng, n: usize, alphabet: &Alphabet) -> EquationSystem {
    let vars: Vec<Var> = (1..=n).map(Var::numbered).collect();
    let mut eqs = Vec::with_capacity(n);
    for i in 0..n {
        let self_coef = g.gen_bool(0.6).then(|| small_regex(g, alphabet));
        let mut pairs = Vec::new();
        for v in vars.iter().take(i) {
            if g.gen_bool(0.7) {
                pairs.push((small_regex(g, alphabet), v.clone()));
            }
        }
        let tail = if g.gen_bool(0.3) {
            Regex::Eps
        } else {
            small_regex(g, alphabet)
        };
        eqs.push((vars[i].clone(), NormalRhs { self_coef, pairs, tail }));
    }
    EquationSystem::new(alphabet.clone(), eqs).unwrap()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub cases: usize,
    pub states: usize,
    pub symbols: usize,
    pub accept_prob: f64,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    pub max_len: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            cases: 200,
            states: 5,
            symbols: 2,
            accept_prob: 0.5,
            seed: 1,
            strategies: vec![Strategy::DelgadoMorais, Strategy::CycleCount],
            max_len: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseWidths {
    pub seed: u64,
    pub widths: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub cases: usize,
    /// Mean of `width(strategy) / width(default)` over the cases.
    pub mean_ratio: BTreeMap<String, f64>,
    pub per_case: Vec<CaseWidths>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("seed {}  cases {}\n", self.seed, self.cases);
        for (k, v) in &self.mean_ratio {
            s.push_str(&format!("{k:<10} {v:>8.4}\n"));
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("strategy {strategy} gave a regex disagreeing with the DFA of case seed {seed}")]
    Oracle { seed: u64, strategy: &'static str },
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

pub fn symbol_alphabet(n: usize) -> Alphabet {
    Alphabet::new("xyzabcdefghijklmnopqrstuvw".chars().take(n.max(1))).unwrap()
}

fn dfa_oracle_agrees(m: &Dfa, r: &Regex, max_len: usize) -> bool {
    let lang = lang_upto(r, max_len);
    m.alphabet
        .words_upto(max_len)
        .iter()
        .all(|w| lang.contains(w) == dfa_accepts(m, w).unwrap())
}

/// Converts each random DFA under Default and every configured strategy and
/// averages the width ratios against Default.
pub fn bench_compare(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.cases == 0 || cfg.states == 0 || cfg.symbols == 0 {
        return Err(BenchError::Config("counts must be at least 1".into()));
    }
    if !(cfg.accept_prob > 0.0 && cfg.accept_prob < 1.0) {
        return Err(BenchError::Config(
            "accept probability must lie strictly between 0 and 1".into(),
        ));
    }
    let alphabet = symbol_alphabet(cfg.symbols);
    let mut seeds = rng(cfg.seed);
    let mut per_case = Vec::with_capacity(cfg.cases);
    let mut sums: BTreeMap<String, f64> = cfg.strategies.iter().map(|s| (s.name().to_string(), 0.0)).collect();
    for _ in 0..cfg.cases {
        let seed: u64 = seeds.gen();
        let m = random_dfa(cfg.states, &alphabet, cfg.accept_prob, seed);
        let mut widths = BTreeMap::new();
        let mut all = vec![Strategy::Default];
        all.extend(cfg.strategies.iter().copied().filter(|&s| s != Strategy::Default));
        for s in all {
            let r = dfa_to_regex(&m, s);
            if !dfa_oracle_agrees(&m, &r, cfg.max_len) {
                return Err(BenchError::Oracle {
                    seed,
                    strategy: s.name(),
                });
            }
            widths.insert(s.name().to_string(), alphabetic_width(&r));
        }
        let base = widths[Strategy::Default.name()];
        for s in &cfg.strategies {
            let w = widths[s.name()];
            *sums.get_mut(s.name()).unwrap() += if base == 0 { 1.0 } else { w as f64 / base as f64 };
        }
        per_case.push(CaseWidths { seed, widths });
    }
    let mean_ratio = sums.into_iter().map(|(k, v)| (k, v / cfg.cases as f64)).collect();
    Ok(BenchReport {
        seed: cfg.seed,
        cases: cfg.cases,
        mean_ratio,
        per_case,
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "regeq",
    about = "Regular equations, DFA to regex, and derivative-based regex operations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Args, Debug, Clone)]
pub struct Shared {
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Default)]
    pub strategy: StrategyArg,
    #[arg(long, global = true, value_enum, default_value_t = RulesArg::Full)]
    pub rules: RulesArg,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Product)]
    pub mode: ModeArg,
    /// Print outputs after similarity simplification.
    #[arg(long, global = true)]
    pub simplify: bool,
    /// Verify the output against an oracle on words up to this length.
    #[arg(long, global = true, value_name = "L")]
    pub check: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Default,
    Delgado,
    Cycles,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Default => Strategy::Default,
            StrategyArg::Delgado => Strategy::DelgadoMorais,
            StrategyArg::Cycles => Strategy::CycleCount,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RulesArg {
    Basic,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Product,
    Reachable,
}

#[derive(Args, Debug, Clone)]
pub struct Target {
    /// A regex to work on.
    #[arg(long = "re", conflicts_with_all = ["eqs", "var"])]
    pub regex: Option<String>,
    /// An equation file; the variable defaults to the first equation.
    #[arg(long)]
    pub eqs: Option<String>,
    #[arg(long)]
    pub var: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an equation file (`-` for stdin).
    Solve { file: String },
    /// Convert a DFA given as JSON.
    Dfa2re {
        file: String,
        /// Drop unreachable states first.
        #[arg(long)]
        prune: bool,
    },
    /// Convert an NFA given as JSON.
    Nfa2re { file: String },
    /// Subtraction r − s.
    Diff { r: String, s: String },
    /// Intersection r ∩ s.
    Isect { r: String, s: String },
    /// Shuffle r ∥ s.
    Shuffle { r: String, s: String },
    /// Parse a word, printing the tree as an s-expression.
    Parse {
        #[command(flatten)]
        target: Target,
        word: String,
    },
    /// Look for two parse trees with the same word.
    Ambig {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        #[arg(long, default_value_t = 20)]
        max_nodes: usize,
    },
    /// List canonical descendants.
    Desc { r: String },
    /// Compare strategies on random DFAs.
    Bench {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        symbols: usize,
        #[arg(long, default_value_t = 0.5)]
        accept_prob: f64,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<SyntaxError> for CliError {
    fn from(e: SyntaxError) -> Self {
        CliError::Input(format!("syntax error: {e}"))
    }
}

impl From<EquationError> for CliError {
    fn from(e: EquationError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DerivError> for CliError {
    fn from(e: DerivError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<OpError> for CliError {
    fn from(e: OpError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::UnknownVar(_) | TreeError::Sexp { .. } => CliError::Input(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

fn rules_of(r: RulesArg) -> SimilarityRules {
    match r {
        RulesArg::Basic => SimilarityRules::BASIC,
        RulesArg::Full => SimilarityRules::FULL,
    }
}

fn shown(r: &Regex, shared: &Shared) -> String {
    if shared.simplify {
        simp(r, SimilarityRules::FULL).to_string()
    } else {
        r.to_string()
    }
}

fn oracle_line(ok: bool) -> Result<String, CliError> {
    if ok {
        Ok("oracle: OK\n".into())
    } else {
        Err(CliError::Domain("oracle: FAIL".into()))
    }
}

fn target_of(t: &Target) -> Result<(EquationSystem, Gamma), CliError> {
    match (&t.regex, &t.eqs) {
        (Some(r), None) => {
            let r = regex_of_text(r)?;
            Ok((EquationSystem::empty(Alphabet::infer([&r])), Gamma::Re(r)))
        }
        (None, Some(path)) => {
            let sys = parse_system(&read_input(path)?)?;
            let v = match &t.var {
                Some(name) => sys
                    .var_named(name)
                    .cloned()
                    .ok_or_else(|| CliError::Input(format!("unknown variable {name}")))?,
                None => sys
                    .vars()
                    .first()
                    .cloned()
                    .ok_or_else(|| CliError::Input("empty equation file".into()))?,
            };
            Ok((sys, Gamma::Var(v)))
        }
        _ => Err(CliError::Input("give exactly one of --re or --eqs".into())),
    }
}

fn run_command(cli: &Cli) -> Result<String, CliError> {
    let sh = &cli.shared;
    let strategy: Strategy = sh.strategy.into();
    let mut out = String::new();
    match &cli.command {
        Command::Solve { file } => {
            let sys = parse_system(&read_input(file)?)?;
            let sol = solve(&sys, strategy)?;
            for (v, r) in &sol.0 {
                out.push_str(&format!("{v} = {}\n", shown(r, sh)));
            }
            if let Some(l) = sh.check {
                out.push_str(&oracle_line(check_solution(&sys, &sol, l))?);
            }
        }
        Command::Dfa2re { file, prune: p } => {
            let mut m = Dfa::from_json(&read_input(file)?)?;
            if *p {
                m = prune(&m);
            }
            let r = dfa_to_regex(&m, strategy);
            out.push_str(&format!("{}\n", shown(&r, sh)));
            if let Some(l) = sh.check {
                out.push_str(&oracle_line(dfa_oracle_agrees(&m, &r, l))?);
            }
        }
        Command::Nfa2re { file } => {
            let m = Nfa::from_json(&read_input(file)?)?;
            let r = nfa_to_regex(&m, strategy);
            out.push_str(&format!("{}\n", shown(&r, sh)));
            if let Some(l) = sh.check {
                let lang = lang_upto(&r, l);
                let ok = m
                    .alphabet
                    .words_upto(l)
                    .iter()
                    .all(|w| lang.contains(w) == m.accepts(w));
                out.push_str(&oracle_line(ok)?);
            }
        }
        Command::Diff { r, s } | Command::Isect { r, s } | Command::Shuffle { r, s } => {
            let op = match &cli.command {
                Command::Diff { .. } => PairOp::Subtract,
                Command::Isect { .. } => PairOp::Intersect,
                _ => PairOp::Shuffle,
            };
            let (r, s) = (regex_of_text(r)?, regex_of_text(s)?);
            let cfg = ProductConfig {
                rules: rules_of(sh.rules),
                mode: match sh.mode {
                    ModeArg::Product => ProductMode::FullProduct,
                    ModeArg::Reachable => ProductMode::ReachableOnly,
                },
                alphabet: None,
            };
            let res = apply_op(op, &r, &s, strategy, &cfg)?;
            out.push_str(&format!("{}\n", shown(&res, sh)));
            if let Some(l) = sh.check {
                let (lr, ls) = (lang_upto(&r, l), lang_upto(&s, l));
                let expected = match op {
                    PairOp::Subtract => lr.difference(&ls).cloned().collect(),
                    PairOp::Intersect => lr.intersection(&ls).cloned().collect(),
                    PairOp::Shuffle => shuffle_langs(&lr, &ls).into_iter().filter(|w| w.len() <= l).collect(),
                };
                out.push_str(&oracle_line(lang_upto(&res, l) == expected)?);
            }
        }
        Command::Parse { target, word } => {
            let (sys, g) = target_of(target)?;
            let t = parse(&sys, &g, word)?;
            out.push_str(&format!("{t}\n"));
        }
        Command::Ambig {
            target,
            max_len,
            max_nodes,
        } => {
            let (sys, g) = target_of(target)?;
            match ambiguity_witness(&sys, &g, *max_len, *max_nodes) {
                Some((a, b)) => out.push_str(&format!("ambiguous\n{a}\n{b}\n")),
                None => out.push_str("no witness within bounds\n"),
            }
        }
        Command::Desc { r } => {
            let r = regex_of_text(r)?;
            let d = descendants(&r, &Alphabet::infer([&r]), rules_of(sh.rules))?;
            for (i, m) in d.members.iter().enumerate() {
                out.push_str(&format!("{i}: {m}\n"));
            }
        }
        Command::Bench {
            cases,
            states,
            symbols,
            accept_prob,
            max_len,
            json,
        } => {
            let cfg = BenchConfig {
                cases: *cases,
                states: *states,
                symbols: *symbols,
                accept_prob: *accept_prob,
                seed: sh.seed,
                strategies: vec![Strategy::DelgadoMorais, Strategy::CycleCount],
                max_len: *max_len,
            };
            let report = bench_compare(&cfg).map_err(|e| match e {
                BenchError::Config(_) => CliError::Input(e.to_string()),
                BenchError::Oracle { .. } => CliError::Domain(e.to_string()),
            })?;
            if *json {
                out.push_str(&serde_json::to_string_pretty(&report).expect("report serializes"));
                out.push('\n');
            } else {
                out.push_str(&report.to_text());
            }
        }
    }
    Ok(out)
}

/// Runs the CLI on `args` (including the program name), writing to the
/// given streams, and returns the exit status.
pub fn cli_main<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match run_command(&cli) {
        Ok(text) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "regeq: {e}");
            e.code()
        }
    }
}

/// Serializes a DFA to the JSON document format.
pub fn dfa_json(m: &Dfa) -> String {
    let doc: AutomatonDoc = m.to_doc();
    serde_json::to_string(&doc).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_trees::is_non_overlapping;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut argv = vec!["regeq"];
        argv.extend_from_slice(args);
        let code = cli_main(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn random_dfa_examples() {
        let xy = symbol_alphabet(2);
        assert_eq!(random_dfa(5, &xy, 0.5, 42), random_dfa(5, &xy, 0.5, 42));
        let one = random_dfa(1, &xy, 0.5, 7);
        assert!(one.delta.iter().flatten().all(|&t| t == 0));
        let m = random_dfa(4, &xy, 0.5, 3);
        assert_eq!(Dfa::from_json(&dfa_json(&m)).unwrap(), m);
    }

    #[test]
    fn generators_respect_their_shapes() {
        let mut g = rng(9);
        let xy = symbol_alphabet(2);
        for _ in 0..50 {
            let w = g.gen_range(1..=5);
            assert_eq!(alphabetic_width(&random_regex(&mut g, &xy, w)), w);
            let n = g.gen_range(1..=4);
            assert!(is_non_overlapping(&random_non_overlapping_system(&mut g, n, &xy)));
            let s = random_strict_order_system(&mut g, n, &xy);
            for (i, e) in s.equations().iter().enumerate() {
                assert!(e.rhs.pairs.iter().all(|(_, v)| v.index <= i));
            }
        }
    }

    #[test]
    fn bench_single_state_ratios_are_one() {
        let cfg = BenchConfig {
            cases: 5,
            states: 1,
            ..Default::default()
        };
        let rep = bench_compare(&cfg).unwrap();
        assert!(rep.mean_ratio.values().all(|&r| (r - 1.0).abs() < 1e-12));
        assert_eq!(rep, bench_compare(&cfg).unwrap());
        assert!(bench_compare(&BenchConfig {
            accept_prob: 1.0,
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn cli_diff_with_check() {
        let (code, out, _) = run(&["diff", "x* y*", "x*", "--check", "6"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        let r = regex_of_text(lines.next().unwrap()).unwrap();
        assert_eq!(lang_upto(&r, 6), lang_upto(&regex_of_text("x* y y*").unwrap(), 6));
        assert_eq!(lines.next(), Some("oracle: OK"));
    }

    #[test]
    fn cli_parse_and_errors() {
        let (code, out, _) = run(&["parse", "--re", "(x y + x + y)*", "xy"]);
        assert_eq!(code, 0);
        let t = crate::parse_trees::tree_of_text(out.trim()).unwrap();
        assert_eq!(crate::parse_trees::flatten(&t), "xy");
        assert_eq!(run(&["parse", "--re", "x*", "y"]).0, 1);
        assert_eq!(run(&["parse", "--re", "(x", "y"]).0, 2);
        assert_eq!(run(&["solve", "/nonexistent/file"]).0, 2);
        assert_eq!(run(&["bogus"]).0, 2);
    }

    #[test]
    fn cli_solve_and_desc() {
        let dir = std::env::temp_dir().join(format!("regeq-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("eqs.txt");
        std::fs::write(&f, "R1 = x R1 + y R2 + ~\nR2 = y R1 + x R2 + ~\n").unwrap();
        let (code, out, _) = run(&["solve", f.to_str().unwrap(), "--strategy", "delgado", "--check", "5"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("R1 = ") && out.contains("\nR2 = ") && out.ends_with("oracle: OK\n"));
        let (code, out, _) = run(&["desc", "(x x)*"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0: (xx)*\n1: x(xx)*\n");
        let (code, out, _) = run(&["ambig", "--re", "x + x", "--max-len", "1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("ambiguous"));
    }

    #[test]
    fn cli_is_deterministic() {
        let a = run(&["bench", "--cases", "3", "--states", "3", "--seed", "5", "--json"]);
        let b = run(&["bench", "--cases", "3", "--states", "3", "--seed", "5", "--json"]);
        assert_eq!(a, b);
        assert_eq!(a.0, 0);
        assert!(a.1.contains("\"mean_ratio\""));
    }
}
