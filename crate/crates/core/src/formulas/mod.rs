//! Formula syntax shared by both sides of the reduction.
//!
//! The same AST describes sentences about the iteration (with `hat`, `leq`
//! and `root`) and the base-side formulas the translator emits (with `rel`).
//! Only `not`, `and` and the two existential binders are core connectives;
//! `or`, `implies` and the universal binders are elaborated by the parser.

use std::collections::BTreeSet;
use std::fmt;

mod parse;
mod print;

pub use parse::{parse_formula, parse_sentence, ParseError};

/// Range of the set quantifiers of a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// No set quantifiers.
    Fo,
    /// Finite sets.
    Weak,
    /// Chains of the designated order.
    Chain,
    /// Finite unions of chains.
    Multichain,
    /// Arbitrary sets.
    Full,
}

impl Regime {
    pub fn keyword(self) -> &'static str {
        match self {
            Regime::Fo => "fo",
            Regime::Weak => "w",
            Regime::Chain => "ch",
            Regime::Multichain => "mch",
            Regime::Full => "full",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Regime> {
        Some(match s {
            "fo" => Regime::Fo,
            "w" => Regime::Weak,
            "ch" => Regime::Chain,
            "mch" => Regime::Multichain,
            "full" => Regime::Full,
            _ => return None,
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::from_keyword(s).ok_or_else(|| format!("unknown regime `{s}` (expected fo, w, ch, mch or full)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    /// The empty word, root of the iteration.
    Root,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    HatRel(String, Vec<Term>),
    PrefLeq(Term, Term),
    Mem(Term, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    ExistsInd(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
}

/// A formula together with the regime its set quantifiers range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub regime: Regime,
    pub formula: Formula,
}

/// Which side of the reduction a formula belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Uses only symbols common to both sides.
    Neutral,
    /// Mentions `hat` or `root`.
    Iteration,
    /// Mentions `rel` or a constant.
    Base,
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::ExistsInd(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::not(Formula::exists(var, Formula::not(body)))
    }

    pub fn exists_set(var: impl Into<String>, body: Formula) -> Formula {
        Formula::ExistsSet(var.into(), Box::new(body))
    }

    pub fn forall_set(var: impl Into<String>, body: Formula) -> Formula {
        Formula::not(Formula::exists_set(var, Formula::not(body)))
    }

    pub fn mem(t: Term, set: impl Into<String>) -> Formula {
        Formula::Mem(t, set.into())
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    /// Balanced conjunction; empty input gives `True`.
    pub fn conj(items: Vec<Formula>) -> Formula {
        fn build(mut items: Vec<Formula>) -> Formula {
            match items.len() {
                0 => Formula::True,
                1 => items.pop().unwrap(),
                n => {
                    let right = items.split_off(n / 2);
                    Formula::and(build(items), build(right))
                }
            }
        }
        let items: Vec<Formula> = items.into_iter().filter(|f| *f != Formula::True).collect();
        if items.contains(&Formula::False) {
            return Formula::False;
        }
        build(items)
    }

    /// Balanced disjunction; empty input gives `False`.
    pub fn disj(items: Vec<Formula>) -> Formula {
        let items: Vec<Formula> = items.into_iter().filter(|f| *f != Formula::False).collect();
        if items.contains(&Formula::True) {
            return Formula::True;
        }
        match items.len() {
            0 => Formula::False,
            1 => items.into_iter().next().unwrap(),
            _ => Formula::not(Formula::conj(items.into_iter().map(Formula::negate).collect())),
        }
    }

    /// Negation with constant folding and double-negation removal.
    pub fn negate(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::not(other),
        }
    }

    /// Conjunction with constant folding.
    pub fn and_folded(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, x) | (x, Formula::True) => x,
            (a, b) => Formula::and(a, b),
        }
    }

    /// Maximum nesting of quantifiers of either kind.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::ExistsInd(_, f) | Formula::ExistsSet(_, f) => 1 + f.quantifier_rank(),
            _ => 0,
        }
    }

    /// Free individual and set variables.
    pub fn free_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut inds = BTreeSet::new();
        let mut sets = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut inds, &mut sets);
        (inds, sets)
    }

    fn collect_free(
        &self,
        bound_inds: &mut Vec<String>,
        bound_sets: &mut Vec<String>,
        inds: &mut BTreeSet<String>,
        sets: &mut BTreeSet<String>,
    ) {
        let mut term = |t: &Term, bound_inds: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound_inds.contains(v) {
                    inds.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) | Formula::PrefLeq(a, b) => {
                term(a, bound_inds);
                term(b, bound_inds);
            }
            Formula::Rel(_, ts) | Formula::HatRel(_, ts) => {
                for t in ts {
                    term(t, bound_inds);
                }
            }
            Formula::Mem(t, s) => {
                term(t, bound_inds);
                if !bound_sets.contains(s) {
                    sets.insert(s.clone());
                }
            }
            Formula::Not(f) => f.collect_free(bound_inds, bound_sets, inds, sets),
            Formula::And(a, b) => {
                a.collect_free(bound_inds, bound_sets, inds, sets);
                b.collect_free(bound_inds, bound_sets, inds, sets);
            }
            Formula::ExistsInd(v, f) => {
                bound_inds.push(v.clone());
                f.collect_free(bound_inds, bound_sets, inds, sets);
                bound_inds.pop();
            }
            Formula::ExistsSet(v, f) => {
                bound_sets.push(v.clone());
                f.collect_free(bound_inds, bound_sets, inds, sets);
                bound_sets.pop();
            }
        }
    }

    pub fn has_set_quantifier(&self) -> bool {
        match self {
            Formula::ExistsSet(..) => true,
            Formula::Not(f) | Formula::ExistsInd(_, f) => f.has_set_quantifier(),
            Formula::And(a, b) => a.has_set_quantifier() || b.has_set_quantifier(),
            _ => false,
        }
    }

    /// Maximum nesting of set quantifiers.
    pub fn set_depth(&self) -> usize {
        match self {
            Formula::ExistsSet(_, f) => 1 + f.set_depth(),
            Formula::Not(f) | Formula::ExistsInd(_, f) => f.set_depth(),
            Formula::And(a, b) => a.set_depth().max(b.set_depth()),
            _ => 0,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::ExistsInd(..) | Formula::ExistsSet(..) => false,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            _ => true,
        }
    }

    /// The side this formula belongs to, or an error naming the first
    /// symbol that clashes with an earlier one.
    pub fn side(&self) -> Result<Side, String> {
        fn merge(a: Side, b: Side) -> Result<Side, String> {
            match (a, b) {
                (Side::Neutral, x) | (x, Side::Neutral) => Ok(x),
                (x, y) if x == y => Ok(x),
                _ => Err("formula mixes base-side and iteration-side symbols".to_string()),
            }
        }
        fn term_side(t: &Term) -> Side {
            match t {
                Term::Var(_) => Side::Neutral,
                Term::Const(_) => Side::Base,
                Term::Root => Side::Iteration,
            }
        }
        fn terms_side(ts: &[Term]) -> Result<Side, String> {
            ts.iter().try_fold(Side::Neutral, |acc, t| merge(acc, term_side(t)))
        }
        match self {
            Formula::True | Formula::False => Ok(Side::Neutral),
            Formula::Eq(a, b) | Formula::PrefLeq(a, b) => terms_side(&[a.clone(), b.clone()]),
            Formula::Rel(_, ts) => merge(Side::Base, terms_side(ts)?),
            Formula::HatRel(_, ts) => merge(Side::Iteration, terms_side(ts)?),
            Formula::Mem(t, _) => Ok(term_side(t)),
            Formula::Not(f) | Formula::ExistsInd(_, f) | Formula::ExistsSet(_, f) => f.side(),
            Formula::And(a, b) => merge(a.side()?, b.side()?),
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Not(f) | Formula::ExistsInd(_, f) | Formula::ExistsSet(_, f) => 1 + f.node_count(),
            Formula::And(a, b) => 1 + a.node_count() + b.node_count(),
            _ => 1,
        }
    }

    /// Number of quantifier nodes.
    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_count(),
            Formula::ExistsInd(_, f) | Formula::ExistsSet(_, f) => 1 + f.quantifier_count(),
            Formula::And(a, b) => a.quantifier_count() + b.quantifier_count(),
            _ => 0,
        }
    }

    /// Relation symbols used by `rel` and `hat` atoms, with their arities.
    pub fn relation_symbols(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Rel(r, ts) | Formula::HatRel(r, ts) = f {
                out.insert((r.clone(), ts.len()));
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(g) | Formula::ExistsInd(_, g) | Formula::ExistsSet(_, g) => g.visit(f),
            Formula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Whether any binder re-binds a variable already bound above it.
    pub fn has_shadowing(&self) -> bool {
        fn go(f: &Formula, bound: &mut Vec<String>) -> bool {
            match f {
                Formula::Not(g) => go(g, bound),
                Formula::And(a, b) => go(a, bound) || go(b, bound),
                Formula::ExistsInd(v, g) | Formula::ExistsSet(v, g) => {
                    if bound.contains(v) {
                        return true;
                    }
                    bound.push(v.clone());
                    let r = go(g, bound);
                    bound.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, &mut Vec::new())
    }
}

impl Sentence {
    pub fn new(regime: Regime, formula: Formula) -> Self {
        Sentence { regime, formula }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn rank_examples() {
        let atom = Formula::mem(x(), "X");
        assert_eq!(atom.quantifier_rank(), 0);
        let two = Formula::exists_set("X", Formula::exists("x", atom.clone()));
        assert_eq!(two.quantifier_rank(), 2);
        let three = Formula::exists("y", Formula::exists("z", Formula::exists("w", Formula::True)));
        assert_eq!(Formula::and(two.clone(), three.clone()).quantifier_rank(), 3);
        assert_eq!(Formula::not(two.clone()).quantifier_rank(), 2);
    }

    #[test]
    fn free_var_examples() {
        let atom = Formula::mem(x(), "X");
        let (i, s) = atom.free_vars();
        assert_eq!(i.into_iter().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec!["X"]);
        let (i, s) = Formula::exists_set("X", atom.clone()).free_vars();
        assert_eq!(i.len(), 1);
        assert!(s.is_empty());
        let closed = Formula::exists("x", Formula::exists_set("X", atom));
        let (i, s) = closed.free_vars();
        assert!(i.is_empty() && s.is_empty());
    }

    #[test]
    fn sides() {
        let it = Formula::HatRel("R".into(), vec![Term::Root]);
        let base = Formula::Rel("R".into(), vec![x()]);
        assert_eq!(it.side(), Ok(Side::Iteration));
        assert_eq!(base.side(), Ok(Side::Base));
        assert!(Formula::and(it, base).side().is_err());
        assert_eq!(Formula::PrefLeq(x(), x()).side(), Ok(Side::Neutral));
    }

    #[test]
    fn folding_helpers() {
        assert_eq!(Formula::conj(vec![]), Formula::True);
        assert_eq!(Formula::disj(vec![]), Formula::False);
        assert_eq!(Formula::disj(vec![Formula::False, Formula::True]), Formula::True);
        assert_eq!(Formula::conj(vec![Formula::True, Formula::False]), Formula::False);
        let a = Formula::mem(x(), "A");
        assert_eq!(Formula::disj(vec![a.clone()]), a);
        assert_eq!(Formula::negate(Formula::not(a.clone())), a);
    }
}
