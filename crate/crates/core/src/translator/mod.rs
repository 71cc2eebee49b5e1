//! Compilation of iteration sentences into weak-MSO formulas over the base.
//!
//! A free set variable `X_i` of the sentence is presented by an automaton
//! whose state count, initial state and final states are fixed in the
//! [`AutomatonContext`]; its transition matrix is left open as the free set
//! variables `T{i}_{p}_{q}` of the output. The output holds in the base
//! expanded by the matrices of `M_1, …, M_ℓ` iff the sentence holds in the
//! iteration with `X_i = L(M_i)`, for quantifier bounds large enough.
//!
//! * An individual `x` becomes a word `a{d}_1 … a{d}_j` of letter variables,
//!   `d` being the number of individual binders above it, with a disjunction
//!   over the length `j ≤ Λ`. Atoms then compare letters position by
//!   position, and `x ∈ X_i` unfolds the run of `M_i` into a disjunction over
//!   state sequences.
//! * `∃X` over chains or multichains guesses a `k`-state automaton: an
//!   alphabet `B{e}`, cells `T{e}_{p}_{q}` whose rows partition it, and a
//!   final set, then checks the language class with the formulas of
//!   [`blocks`] and compiles the body with the new entry in the context.
//! * `∃X` over finite sets is first rewritten to a multichain quantifier
//!   guarded by [`embed_finiteness`].
//!
//! Bounds come from a [`BoundPolicy`]. The bounds of the theory are far too
//! large to emit for any quantifier rank above zero, so practical runs use
//! explicit overrides, which are only as sound as the argument behind them.

pub mod blocks;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::Dfa;
use crate::bounds::{bound_set, BigBound, BoundSet};
use crate::formulas::{Formula, Regime, Sentence, Term};
use crate::structures::Signature;

pub use blocks::{
    formula_chain, formula_dkpath, formula_finite, formula_matrix_wellformed, formula_mchain, formula_row_partition,
    formula_run, formula_singleton, Cells,
};

/// Largest bounds PAPER mode will try to emit.
pub const PAPER_MAX_STATES: usize = 12;
pub const PAPER_MAX_LENGTH: usize = 64;
pub const DEFAULT_MAX_NODES: usize = 5_000_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TranslateError {
    #[error("free set variable `{0}` has no automaton in the context")]
    FreeSet(String),
    #[error("free individual variable `{0}`; only sentences can be translated")]
    FreeIndividual(String),
    #[error("`{0}` is not an iteration-side symbol")]
    NotIterationSide(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {expected}, applied to {found} arguments")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("regime `{0}` cannot be translated")]
    Regime(Regime),
    #[error("invalid context: {0}")]
    Context(String),
    #[error("variable `{0}` clashes with a name reserved for finiteness guards")]
    ReservedName(String),
    #[error("output too large: {reason}")]
    TooLarge { reason: String, bounds: Option<Box<BoundSet>> },
}

/// One automaton-presented free set variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtxEntry {
    pub name: String,
    pub states: usize,
    pub initial: usize,
    #[serde(rename = "final")]
    pub finals: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AutomatonContext {
    entries: Vec<CtxEntry>,
}

impl AutomatonContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_entry(
        mut self,
        name: impl Into<String>,
        states: usize,
        initial: usize,
        finals: impl IntoIterator<Item = usize>,
    ) -> Result<Self, TranslateError> {
        self.push(CtxEntry {
            name: name.into(),
            states,
            initial,
            finals: finals.into_iter().collect(),
        })?;
        Ok(self)
    }

    /// The context of the given automata, with their matrix cells as a set assignment.
    pub fn from_automata(named: &[(&str, &Dfa)]) -> Result<(Self, BTreeMap<String, BTreeSet<usize>>), TranslateError> {
        let mut ctx = AutomatonContext::new();
        for (name, dfa) in named {
            ctx = ctx.with_entry(*name, dfa.states(), dfa.initial(), dfa.finals())?;
        }
        let sets = ctx.assignment(&named.iter().map(|(_, d)| *d).collect::<Vec<_>>())?;
        Ok((ctx, sets))
    }

    fn push(&mut self, entry: CtxEntry) -> Result<(), TranslateError> {
        if entry.states == 0 {
            return Err(TranslateError::Context(format!("`{}` needs at least one state", entry.name)));
        }
        if entry.initial >= entry.states || entry.finals.iter().any(|&f| f >= entry.states) {
            return Err(TranslateError::Context(format!("state out of range for `{}`", entry.name)));
        }
        if self.entries.iter().any(|e| e.name == entry.name) {
            return Err(TranslateError::Context(format!("`{}` listed twice", entry.name)));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, TranslateError> {
        let list: Vec<CtxEntry> = serde_json::from_str(text).map_err(|e| TranslateError::Context(e.to_string()))?;
        let mut ctx = AutomatonContext::new();
        for e in list {
            ctx.push(e)?;
        }
        Ok(ctx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.entries).expect("context serializes")
    }

    pub fn entries(&self) -> &[CtxEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn state_counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.states).collect()
    }

    /// Cells of entry `i` (0-based), named `T{i+1}_{p}_{q}`.
    pub fn cells(i: usize) -> Cells {
        Cells::new(format!("T{}", i + 1))
    }

    pub fn cell_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .entries
            .iter()
            .enumerate()
            .flat_map(|(i, e)| Self::cells(i).all(e.states))
            .collect();
        names.sort();
        names
    }

    /// Values of all cells for concrete automata matching the entries.
    pub fn assignment(&self, automata: &[&Dfa]) -> Result<BTreeMap<String, BTreeSet<usize>>, TranslateError> {
        if automata.len() != self.entries.len() {
            return Err(TranslateError::Context(format!(
                "{} automata for {} entries",
                automata.len(),
                self.entries.len()
            )));
        }
        let mut out = BTreeMap::new();
        for (i, (e, d)) in self.entries.iter().zip(automata).enumerate() {
            if d.states() != e.states || d.initial() != e.initial || d.finals() != e.finals {
                return Err(TranslateError::Context(format!("automaton does not match entry `{}`", e.name)));
            }
            let cells = Self::cells(i);
            let m = d.matrix();
            for p in 0..e.states {
                for q in 0..e.states {
                    out.insert(cells.cell(p, q), m.cells[p][q].clone());
                }
            }
        }
        Ok(out)
    }
}

/// Explicit bounds for testing; sound only with an outside argument.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideBounds {
    /// State count of every quantified automaton.
    pub states: usize,
    /// Maximal word length of every individual.
    pub length: usize,
    /// Per-variable replacements of either bound.
    #[serde(default)]
    pub vars: BTreeMap<String, usize>,
}

impl OverrideBounds {
    pub fn new(states: usize, length: usize) -> Self {
        OverrideBounds {
            states,
            length,
            vars: BTreeMap::new(),
        }
    }

    pub fn with_var(mut self, name: impl Into<String>, bound: usize) -> Self {
        self.vars.insert(name.into(), bound);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, TranslateError> {
        let o: OverrideBounds = serde_json::from_str(text).map_err(|e| TranslateError::Context(e.to_string()))?;
        if o.states == 0 || o.vars.values().any(|&v| v == 0) {
            return Err(TranslateError::Context("override bounds must be at least 1".into()));
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundPolicy {
    /// Bounds of the theory, refused above `max_nodes` output nodes.
    Paper { max_nodes: usize },
    Override(OverrideBounds),
}

impl BoundPolicy {
    pub fn paper() -> Self {
        BoundPolicy::Paper {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Provenance of a translated formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metadata {
    pub policy: String,
    pub sound: bool,
    /// Bound used per quantified variable, e.g. `"x": "length 3"`.
    pub bounds: BTreeMap<String, String>,
    pub node_count: usize,
    pub quantifier_count: usize,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub formula: Formula,
    pub metadata: Metadata,
}

impl Translation {
    /// The output file: a comment header and the formula as a `w` sentence.
    pub fn render(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        out.push_str(&format!("; policy: {}\n", m.policy));
        if !m.sound {
            out.push_str("; unsound unless externally justified\n");
        }
        for (v, b) in &m.bounds {
            out.push_str(&format!("; bound {v}: {b}\n"));
        }
        out.push_str(&format!("; nodes: {}, quantifiers: {}\n", m.node_count, m.quantifier_count));
        out.push_str(&format!("; free sets: {}\n", m.cells.join(" ")));
        out.push_str(&Sentence::new(Regime::Weak, self.formula.clone()).to_string());
        out.push('\n');
        out
    }
}

/// Prefix of the variables introduced by [`embed_finiteness`].
pub const GUARD_PREFIX: &str = "fin_";

/// "Every nonempty subset of `X` has a `⪯`-maximal element", to be read
/// with set quantifiers ranging over multichains.
///
/// A finite set passes. An infinite multichain contains an infinite chain,
/// which has no maximal element; for a regular multichain that chain can be
/// taken regular (the part of `X` along an ultimately periodic branch).
pub fn embed_finiteness(x: &str) -> Formula {
    let name = |v: &str| format!("{GUARD_PREFIX}{x}_{v}");
    let (c, z, w, m, y) = (name("C"), name("z"), name("w"), name("x"), name("y"));
    let inside = Formula::forall(
        &z,
        Formula::implies(Formula::mem(Term::var(&z), &c), Formula::mem(Term::var(&z), x)),
    );
    let nonempty = Formula::exists(&w, Formula::mem(Term::var(&w), &c));
    let maximal = Formula::exists(
        &m,
        Formula::and(
            Formula::mem(Term::var(&m), &c),
            Formula::forall(
                &y,
                Formula::implies(
                    Formula::and(Formula::mem(Term::var(&y), &c), Formula::PrefLeq(Term::var(&m), Term::var(&y))),
                    Formula::eq(Term::var(&y), Term::var(&m)),
                ),
            ),
        ),
    );
    Formula::forall_set(c, Formula::implies(Formula::and(inside, nonempty), maximal))
}

/// Rewrites finite-set quantifiers into guarded multichain quantifiers.
pub fn relativize_weak(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => Formula::not(relativize_weak(g)),
        Formula::And(a, b) => Formula::and(relativize_weak(a), relativize_weak(b)),
        Formula::ExistsInd(v, g) => Formula::exists(v, relativize_weak(g)),
        Formula::ExistsSet(v, g) => Formula::exists_set(v, Formula::and(embed_finiteness(v), relativize_weak(g))),
        atom => atom.clone(),
    }
}

/// Translates a sentence. The result also requires each context matrix to
/// be well formed, so its free variables are exactly the context cells.
pub fn translate(
    sentence: &Sentence,
    ctx: &AutomatonContext,
    policy: &BoundPolicy,
    sig: &Signature,
) -> Result<Translation, TranslateError> {
    let mut c = Compiler::new(sentence.regime, ctx, policy, sig)?;
    let body = c.run(&sentence.formula)?;
    let wellformed = Formula::conj(
        ctx.entries
            .iter()
            .enumerate()
            .map(|(i, e)| formula_matrix_wellformed(&AutomatonContext::cells(i), e.states))
            .collect(),
    );
    let formula = Formula::and(wellformed, body);
    let (policy_name, sound) = match policy {
        BoundPolicy::Paper { .. } => ("paper".to_string(), true),
        BoundPolicy::Override(o) => (format!("override (states {}, length {})", o.states, o.length), false),
    };
    let metadata = Metadata {
        policy: policy_name,
        sound,
        bounds: c.used,
        node_count: formula.node_count(),
        quantifier_count: formula.quantifier_count(),
        cells: ctx.cell_names(),
    };
    Ok(Translation { formula, metadata })
}

/// The translation without the well-formedness conjunct. It commutes with
/// `¬` and `∧` up to constant folding.
pub fn compile(
    formula: &Formula,
    regime: Regime,
    ctx: &AutomatonContext,
    policy: &BoundPolicy,
    sig: &Signature,
) -> Result<Formula, TranslateError> {
    Compiler::new(regime, ctx, policy, sig)?.run(formula)
}

struct Compiler<'a> {
    regime: Regime,
    policy: &'a BoundPolicy,
    sig: &'a Signature,
    entries: Vec<CtxEntry>,
    /// Individual variables and their letter variables, innermost last.
    env: Vec<(String, Vec<String>)>,
    used: BTreeMap<String, String>,
}

impl<'a> Compiler<'a> {
    fn new(
        regime: Regime,
        ctx: &AutomatonContext,
        policy: &'a BoundPolicy,
        sig: &'a Signature,
    ) -> Result<Self, TranslateError> {
        if regime == Regime::Full {
            return Err(TranslateError::Regime(regime));
        }
        Ok(Compiler {
            regime,
            policy,
            sig,
            entries: ctx.entries.clone(),
            env: Vec::new(),
            used: BTreeMap::new(),
        })
    }

    fn run(&mut self, formula: &Formula) -> Result<Formula, TranslateError> {
        let (_, free_sets) = formula.free_vars();
        if let Some(s) = free_sets.iter().find(|s| !self.entries.iter().any(|e| &e.name == *s)) {
            return Err(TranslateError::FreeSet(s.clone()));
        }
        let formula = if self.regime == Regime::Weak {
            let mut clash = None;
            formula.visit(&mut |g| {
                if let Formula::ExistsInd(v, _) | Formula::ExistsSet(v, _) = g {
                    if v.starts_with(GUARD_PREFIX) {
                        clash = Some(v.clone());
                    }
                }
            });
            if let Some(v) = clash {
                return Err(TranslateError::ReservedName(v));
            }
            relativize_weak(formula)
        } else {
            formula.clone()
        };
        let out = self.compile(&formula)?;
        self.check_size(&out)?;
        Ok(out)
    }

    fn check_size(&self, f: &Formula) -> Result<(), TranslateError> {
        if let BoundPolicy::Paper { max_nodes } = self.policy {
            let n = f.node_count();
            if n > *max_nodes {
                return Err(TranslateError::TooLarge {
                    reason: format!("{n} nodes exceed the limit of {max_nodes}"),
                    bounds: None,
                });
            }
        }
        Ok(())
    }

    fn paper_bounds(&self, body: &Formula) -> BoundSet {
        let counts: Vec<usize> = self.entries.iter().map(|e| e.states).collect();
        bound_set(self.sig, &counts, counts.len(), body.quantifier_rank())
    }

    fn to_small(value: &BigBound, cap: usize, what: String, bounds: BoundSet) -> Result<usize, TranslateError> {
        match value.to_u64() {
            Some(v) if v as usize <= cap => Ok(v as usize),
            _ => Err(TranslateError::TooLarge {
                reason: format!("{what} = {value} exceeds the emission limit {cap}"),
                bounds: Some(Box::new(bounds)),
            }),
        }
    }

    fn length_bound(&mut self, var: &str, body: &Formula) -> Result<usize, TranslateError> {
        let len = match self.policy {
            BoundPolicy::Override(o) => *o.vars.get(var).unwrap_or(&o.length),
            BoundPolicy::Paper { .. } => {
                let b = self.paper_bounds(body);
                let s = b.s.clone();
                Self::to_small(&s, PAPER_MAX_LENGTH, format!("witness length for `{var}`"), b)?
            }
        };
        self.used.insert(var.to_string(), format!("length {len}"));
        Ok(len)
    }

    fn state_bound(&mut self, var: &str, body: &Formula) -> Result<usize, TranslateError> {
        let k = match self.policy {
            BoundPolicy::Override(o) => *o.vars.get(var).unwrap_or(&o.states),
            BoundPolicy::Paper { .. } => {
                let b = self.paper_bounds(body);
                let k = if self.regime == Regime::Chain {
                    b.chain.clone()
                } else {
                    b.multichain.clone()
                };
                Self::to_small(&k, PAPER_MAX_STATES, format!("state bound for `{var}`"), b)?
            }
        };
        self.used.insert(var.to_string(), format!("states {k}"));
        Ok(k)
    }

    fn letters(&self, t: &Term) -> Result<Vec<String>, TranslateError> {
        match t {
            Term::Root => Ok(Vec::new()),
            Term::Var(v) => self
                .env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, ls)| ls.clone())
                .ok_or_else(|| TranslateError::FreeIndividual(v.clone())),
            Term::Const(c) => Err(TranslateError::NotIterationSide(format!("const {c}"))),
        }
    }

    fn compile(&mut self, f: &Formula) -> Result<Formula, TranslateError> {
        Ok(match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Not(g) => Formula::negate(self.compile(g)?),
            Formula::And(a, b) => {
                let a = self.compile(a)?;
                let b = self.compile(b)?;
                Formula::and_folded(a, b)
            }
            Formula::Eq(s, t) => {
                let (s, t) = (self.letters(s)?, self.letters(t)?);
                if s.len() != t.len() {
                    Formula::False
                } else {
                    letterwise(&s, &t)
                }
            }
            Formula::PrefLeq(s, t) => {
                let (s, t) = (self.letters(s)?, self.letters(t)?);
                if s.len() > t.len() {
                    Formula::False
                } else {
                    letterwise(&s, &t[..s.len()])
                }
            }
            Formula::HatRel(r, ts) => {
                let expected = self.sig.arity(r).ok_or_else(|| TranslateError::UnknownRelation(r.clone()))?;
                if expected != ts.len() {
                    return Err(TranslateError::Arity {
                        relation: r.clone(),
                        expected,
                        found: ts.len(),
                    });
                }
                let words: Vec<Vec<String>> = ts.iter().map(|t| self.letters(t)).collect::<Result<_, _>>()?;
                let len = words[0].len();
                if len == 0 || words.iter().any(|w| w.len() != len) {
                    Formula::False
                } else {
                    let mut parts: Vec<Formula> = words[1..]
                        .iter()
                        .map(|w| letterwise(&words[0][..len - 1], &w[..len - 1]))
                        .collect();
                    parts.push(Formula::Rel(r.clone(), words.iter().map(|w| Term::var(&w[len - 1])).collect()));
                    Formula::conj(parts)
                }
            }
            Formula::Mem(t, x) => {
                let letters = self.letters(t)?;
                let i = self
                    .entries
                    .iter()
                    .rposition(|e| &e.name == x)
                    .ok_or_else(|| TranslateError::FreeSet(x.clone()))?;
                let e = &self.entries[i];
                let finals: Vec<usize> = e.finals.iter().copied().collect();
                formula_run(&AutomatonContext::cells(i), e.states, e.initial, &finals, &letters)
            }
            Formula::Rel(r, _) => return Err(TranslateError::NotIterationSide(format!("rel {r}"))),
            Formula::ExistsInd(x, body) => {
                let max = self.length_bound(x, body)?;
                let depth = self.env.len() + 1;
                let mut cases = Vec::with_capacity(max + 1);
                for len in 0..=max {
                    let letters: Vec<String> = (1..=len).map(|t| format!("a{depth}_{t}")).collect();
                    self.env.push((x.clone(), letters.clone()));
                    let inner = self.compile(body);
                    self.env.pop();
                    let inner = inner?;
                    cases.push(letters.iter().rev().fold(inner, |acc, a| Formula::exists(a, acc)));
                }
                let out = Formula::disj(cases);
                self.check_size(&out)?;
                out
            }
            Formula::ExistsSet(x, body) => {
                let regime = self.regime;
                if !matches!(regime, Regime::Chain | Regime::Multichain | Regime::Weak) {
                    return Err(TranslateError::Regime(regime));
                }
                let k = self.state_bound(x, body)?;
                let index = self.entries.len();
                let cells = AutomatonContext::cells(index);
                let alphabet = format!("B{}", index + 1);
                let mut cases = Vec::new();
                for mask in 0u64..1 << k {
                    let finals: Vec<usize> = (0..k).filter(|&q| mask >> q & 1 == 1).collect();
                    let class = if regime == Regime::Chain {
                        formula_chain(&cells, k, 0, &finals)
                    } else {
                        formula_mchain(&cells, k, 0, &finals)
                    };
                    self.entries.push(CtxEntry {
                        name: x.clone(),
                        states: k,
                        initial: 0,
                        finals: finals.iter().copied().collect(),
                    });
                    let inner = self.compile(body);
                    self.entries.pop();
                    cases.push(Formula::and_folded(class, inner?));
                }
                let mut out = Formula::disj(cases);
                for p in (0..k).rev() {
                    out = Formula::and(formula_row_partition(&cells, k, p, &alphabet), out);
                    for q in (0..k).rev() {
                        out = Formula::exists_set(cells.cell(p, q), out);
                    }
                }
                let out = Formula::exists_set(alphabet, out);
                self.check_size(&out)?;
                out
            }
        })
    }
}

fn letterwise(s: &[String], t: &[String]) -> Formula {
    Formula::conj(
        s.iter()
            .zip(t)
            .filter(|(a, b)| a != b)
            .map(|(a, b)| Formula::eq(Term::var(a), Term::var(b)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{eval, expand_with_sets};
    use crate::formulas::parse_sentence;
    use crate::structures::FiniteStructure;

    fn tree_base() -> FiniteStructure {
        FiniteStructure::new(2)
            .with_relation("R1", 1, [vec![0]])
            .unwrap()
            .with_relation("R2", 1, [vec![1]])
            .unwrap()
    }

    fn over(states: usize, length: usize) -> BoundPolicy {
        BoundPolicy::Override(OverrideBounds::new(states, length))
    }

    fn run(text: &str, base: &FiniteStructure, policy: &BoundPolicy) -> bool {
        let s = parse_sentence(text).unwrap();
        let t = translate(&s, &AutomatonContext::new(), policy, base.signature()).unwrap();
        eval(base, &t.formula, Regime::Weak).unwrap()
    }

    #[test]
    fn hat_atom_reduces_to_base_atom() {
        let base = tree_base();
        let s = parse_sentence("(fo (exists x (hat R1 x)))").unwrap();
        let t = translate(&s, &AutomatonContext::new(), &over(1, 1), base.signature()).unwrap();
        let expected = Formula::exists("a1_1", Formula::Rel("R1".into(), vec![Term::var("a1_1")]));
        assert_eq!(t.formula, Formula::and(Formula::True, expected));
        assert!(eval(&base, &t.formula, Regime::Weak).unwrap());
        assert!(!t.metadata.sound);
        assert!(t.render().contains("unsound unless externally justified"));
    }

    #[test]
    fn root_is_least() {
        for n in 1..=3 {
            let base = FiniteStructure::new(n).with_relation("R", 1, [vec![0]]).unwrap();
            for len in 0..=3 {
                assert!(run("(fo (forall x (leq root x)))", &base, &over(1, len)));
            }
        }
    }

    #[test]
    fn chain_set_containing_root() {
        let base = FiniteStructure::new(1);
        assert!(run("(ch (exists-set X (in root X)))", &base, &over(2, 1)));
        assert!(run("(mch (exists-set X (and (in root X) (exists x (and (in x X) (not (= x root)))))))", &base, &over(2, 1)));
    }

    #[test]
    fn homomorphic_in_not_and_and() {
        let base = tree_base();
        let sig = base.signature();
        let policy = over(2, 2);
        let a = parse_sentence("(mch (exists x (hat R1 x)))").unwrap().formula;
        let b = parse_sentence("(mch (exists-set X (exists x (in x X))))").unwrap().formula;
        let c = |f: &Formula| compile(f, Regime::Multichain, &AutomatonContext::new(), &policy, sig).unwrap();
        assert_eq!(c(&Formula::not(a.clone())), Formula::negate(c(&a)));
        assert_eq!(c(&Formula::and(a.clone(), b.clone())), Formula::and_folded(c(&a), c(&b)));
    }

    #[test]
    fn free_variables_are_the_cells() {
        let base = tree_base();
        let dfa = crate::automata::singleton_dfa(&crate::structures::Word(vec![0]), &[0, 1]).unwrap();
        let (ctx, sets) = AutomatonContext::from_automata(&[("X", &dfa)]).unwrap();
        let s = parse_sentence("(mch (exists x (and (in x X) (hat R1 x))))").unwrap();
        let t = translate(&s, &ctx, &over(2, 2), base.signature()).unwrap();
        let (inds, free) = t.formula.free_vars();
        assert!(inds.is_empty());
        assert_eq!(free.into_iter().collect::<Vec<_>>(), ctx.cell_names());
        assert!(t.formula.side().is_ok_and(|s| s != crate::formulas::Side::Iteration));
        let expanded = expand_with_sets(&base, &sets).unwrap();
        assert!(eval(&expanded, &t.formula, Regime::Weak).unwrap());
        let again = translate(&s, &ctx, &over(2, 2), base.signature()).unwrap();
        assert_eq!(again.render(), t.render());
    }

    #[test]
    fn errors() {
        let base = tree_base();
        let sig = base.signature();
        let ctx = AutomatonContext::new();
        let s = parse_sentence("(mch (exists x (in x Y)))").unwrap();
        assert!(matches!(translate(&s, &ctx, &over(1, 1), sig), Err(TranslateError::FreeSet(_))));
        let s = parse_sentence("(full (exists-set X true))").unwrap();
        assert!(matches!(translate(&s, &ctx, &over(1, 1), sig), Err(TranslateError::Regime(_))));
        let s = parse_sentence("(fo (exists x (hat R3 x)))").unwrap();
        assert!(matches!(translate(&s, &ctx, &over(1, 1), sig), Err(TranslateError::UnknownRelation(_))));
        let s = parse_sentence("(mch (exists-set X (exists x (in x X))))").unwrap();
        let err = translate(&s, &ctx, &BoundPolicy::paper(), sig).unwrap_err();
        assert!(matches!(err, TranslateError::TooLarge { bounds: Some(_), .. }));
        assert!(AutomatonContext::new().with_entry("X", 2, 2, []).is_err());
    }

    #[test]
    fn paper_mode_quantifier_free() {
        let base = tree_base();
        let s = parse_sentence("(fo (not (hat R1 root)))").unwrap();
        let t = translate(&s, &AutomatonContext::new(), &BoundPolicy::paper(), base.signature()).unwrap();
        assert!(t.metadata.sound);
        assert!(eval(&base, &t.formula, Regime::Weak).unwrap());
    }

    #[test]
    fn short_override_fools_the_guard() {
        // 0* is infinite, but with individuals cut at length 1 the word 0
        // looks maximal, so the guard accepts it
        let base = FiniteStructure::new(1);
        assert!(run("(w (exists-set X (forall x (in x X))))", &base, &over(2, 1)));
    }

    #[test]
    fn guard_shape() {
        let g = embed_finiteness("X");
        assert_eq!(g.set_depth(), 1);
        assert_eq!(g.free_vars().1.into_iter().collect::<Vec<_>>(), vec!["X"]);
        assert!(g.free_vars().0.is_empty());
    }
}
