//! Exact evaluation on finite structures.
//!
//! Formulas are compiled to a [`Program`] whose variables are slot indices
//! and whose set values are bit masks over the universe, so universes are
//! limited to 64 elements once set quantifiers are involved. Free set
//! variables are either unary predicates of the structure or parameters
//! supplied on each run, which lets one compiled formula be evaluated
//! against many expansions.
//!
//! On a finite structure every subset is finite and every subset of a
//! poset is a finite union of (singleton) chains, so `WEAK`, `MULTICHAIN`
//! and `FULL` coincide; only `CHAIN` restricts the range.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::formulas::{Formula, Regime, Term};
use crate::structures::{FiniteStructure, StructureError, ROOT_SYMBOL};

/// Universes above this size are refused once set quantifiers nest deeper
/// than [`MAX_SET_DEPTH`].
pub const GUARD_UNIVERSE: usize = 16;
pub const MAX_SET_DEPTH: usize = 2;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("uninterpreted symbol `{0}`")]
    Uninterpreted(String),
    #[error("relation `{relation}` has arity {expected}, applied to {found} arguments")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("free individual variable `{0}`")]
    FreeVariable(String),
    #[error("`{0}` is an iteration-side symbol")]
    IterationSymbol(String),
    #[error("regime `{0}` needs an interpreted order")]
    Unordered(Regime),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// The base plus one unary predicate per named set.
pub fn expand_with_sets(
    base: &FiniteStructure,
    named_sets: &BTreeMap<String, BTreeSet<usize>>,
) -> Result<FiniteStructure, StructureError> {
    named_sets
        .iter()
        .try_fold(base.clone(), |s, (name, members)| s.with_predicate(name.clone(), members.iter().copied()))
}

/// Truth of a closed formula.
pub fn eval(structure: &FiniteStructure, formula: &Formula, regime: Regime) -> Result<bool, EvalError> {
    Ok(Program::compile(structure, formula, regime, &[], &[])?.run(&[], &[]))
}

/// Truth under an assignment of the free individual variables.
pub fn eval_with(
    structure: &FiniteStructure,
    formula: &Formula,
    regime: Regime,
    inds: &BTreeMap<String, usize>,
) -> Result<bool, EvalError> {
    let names: Vec<String> = inds.keys().cloned().collect();
    let values: Vec<usize> = inds.values().copied().collect();
    Ok(Program::compile(structure, formula, regime, &names, &[])?.run(&values, &[]))
}

#[derive(Debug, Clone, Copy)]
enum T {
    Slot(usize),
    Param(usize),
    Fixed(usize),
}

#[derive(Debug, Clone, Copy)]
enum S {
    Slot(usize),
    Param(usize),
    Fixed(u64),
}

#[derive(Debug, Clone)]
enum Node {
    Bool(bool),
    Eq(T, T),
    Leq(T, T),
    Rel(usize, Vec<T>),
    Mem(T, S),
    Not(Box<Node>),
    And(Vec<Node>),
    ExistsInd(usize, Box<Node>),
    ExistsSet(usize, Box<Node>),
}

#[derive(Debug, Clone)]
enum Table {
    Dense { arity: usize, bits: Vec<u64> },
    Sparse(HashSet<Vec<usize>>),
}

#[derive(Debug, Clone)]
enum SetRange {
    All(u64),
    Listed(Vec<u64>),
}

/// A formula compiled against a structure.
#[derive(Debug, Clone)]
pub struct Program {
    root: Node,
    size: usize,
    tables: Vec<Table>,
    /// `order[a]` has bit `b` set iff `a ⪯ b`.
    order: Vec<u64>,
    range: SetRange,
    ind_slots: usize,
    set_slots: usize,
}

struct Compiler<'a> {
    structure: &'a FiniteStructure,
    ind_params: &'a [String],
    set_params: &'a [String],
    inds: Vec<String>,
    sets: Vec<String>,
    max_inds: usize,
    max_sets: usize,
    rel_index: HashMap<String, usize>,
    tables: Vec<Table>,
    uses_order: bool,
}

impl Compiler<'_> {
    fn term(&mut self, t: &Term) -> Result<T, EvalError> {
        match t {
            Term::Var(v) => {
                if let Some(i) = self.inds.iter().rposition(|x| x == v) {
                    Ok(T::Slot(i))
                } else if let Some(i) = self.ind_params.iter().position(|x| x == v) {
                    Ok(T::Param(i))
                } else {
                    Err(EvalError::FreeVariable(v.clone()))
                }
            }
            Term::Const(c) => self
                .structure
                .constant(c)
                .map(T::Fixed)
                .ok_or_else(|| EvalError::Uninterpreted(c.clone())),
            Term::Root => self
                .structure
                .constant(ROOT_SYMBOL)
                .map(T::Fixed)
                .ok_or_else(|| EvalError::IterationSymbol(ROOT_SYMBOL.into())),
        }
    }

    fn table(&mut self, name: &str, arity: usize) -> Result<usize, EvalError> {
        let expected = self
            .structure
            .signature()
            .arity(name)
            .ok_or_else(|| EvalError::Uninterpreted(name.to_string()))?;
        if expected != arity {
            return Err(EvalError::Arity {
                relation: name.to_string(),
                expected,
                found: arity,
            });
        }
        if let Some(&i) = self.rel_index.get(name) {
            return Ok(i);
        }
        let tuples = self.structure.relation(name).expect("declared relation");
        let n = self.structure.size();
        let cells = (n as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        let table = if cells <= 1 << 22 {
            let mut bits = vec![0u64; (cells as usize).div_ceil(64).max(1)];
            for t in tuples {
                let idx = t.iter().fold(0usize, |acc, &e| acc * n + e);
                bits[idx / 64] |= 1 << (idx % 64);
            }
            Table::Dense { arity, bits }
        } else {
            Table::Sparse(tuples.iter().cloned().collect())
        };
        self.tables.push(table);
        self.rel_index.insert(name.to_string(), self.tables.len() - 1);
        Ok(self.tables.len() - 1)
    }

    fn set(&mut self, name: &str) -> Result<S, EvalError> {
        if let Some(i) = self.sets.iter().rposition(|x| x == name) {
            return Ok(S::Slot(i));
        }
        if let Some(i) = self.set_params.iter().position(|x| x == name) {
            return Ok(S::Param(i));
        }
        match self.structure.predicate(name) {
            Some(members) => Ok(S::Fixed(members.iter().filter(|&&e| e < 64).fold(0, |m, &e| m | 1 << e))),
            None => Err(EvalError::Uninterpreted(name.to_string())),
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node, EvalError> {
        Ok(match f {
            Formula::True => Node::Bool(true),
            Formula::False => Node::Bool(false),
            Formula::Eq(a, b) => Node::Eq(self.term(a)?, self.term(b)?),
            Formula::PrefLeq(a, b) => {
                if self.structure.order().is_none() {
                    return Err(EvalError::Uninterpreted(crate::structures::ORDER_SYMBOL.into()));
                }
                self.uses_order = true;
                Node::Leq(self.term(a)?, self.term(b)?)
            }
            Formula::Rel(r, ts) => {
                let i = self.table(r, ts.len())?;
                Node::Rel(i, ts.iter().map(|t| self.term(t)).collect::<Result<_, _>>()?)
            }
            Formula::HatRel(r, _) => return Err(EvalError::IterationSymbol(format!("hat {r}"))),
            Formula::Mem(t, s) => Node::Mem(self.term(t)?, self.set(s)?),
            Formula::Not(g) => match self.node(g)? {
                Node::Bool(b) => Node::Bool(!b),
                Node::Not(inner) => *inner,
                other => Node::Not(Box::new(other)),
            },
            Formula::And(..) => {
                let mut parts = Vec::new();
                self.flatten(f, &mut parts)?;
                if parts.iter().any(|p| matches!(p, Node::Bool(false))) {
                    Node::Bool(false)
                } else {
                    parts.retain(|p| !matches!(p, Node::Bool(true)));
                    match parts.len() {
                        0 => Node::Bool(true),
                        1 => parts.pop().unwrap(),
                        _ => Node::And(parts),
                    }
                }
            }
            Formula::ExistsInd(v, g) => {
                self.inds.push(v.clone());
                let slot = self.inds.len() - 1;
                self.max_inds = self.max_inds.max(self.inds.len());
                let body = self.node(g);
                self.inds.pop();
                Node::ExistsInd(slot, Box::new(body?))
            }
            Formula::ExistsSet(v, g) => {
                self.sets.push(v.clone());
                let slot = self.sets.len() - 1;
                self.max_sets = self.max_sets.max(self.sets.len());
                let body = self.node(g);
                self.sets.pop();
                Node::ExistsSet(slot, Box::new(body?))
            }
        })
    }

    fn flatten(&mut self, f: &Formula, out: &mut Vec<Node>) -> Result<(), EvalError> {
        match f {
            Formula::And(a, b) => {
                self.flatten(a, out)?;
                self.flatten(b, out)
            }
            other => {
                out.push(self.node(other)?);
                Ok(())
            }
        }
    }
}

/// All chains of the structure's order as masks, including the empty set.
pub fn chains(structure: &FiniteStructure) -> Vec<u64> {
    let n = structure.size();
    let comparable: Vec<u64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| structure.leq(a, b) == Some(true) || structure.leq(b, a) == Some(true))
                .fold(0u64, |m, b| m | 1 << b)
        })
        .collect();
    let mut out = Vec::new();
    fn grow(start: usize, current: u64, allowed: u64, n: usize, comparable: &[u64], out: &mut Vec<u64>) {
        out.push(current);
        for e in start..n {
            if allowed >> e & 1 == 1 {
                grow(e + 1, current | 1 << e, allowed & comparable[e], n, comparable, out);
            }
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    grow(0, 0, all, n, &comparable, &mut out);
    out
}

impl Program {
    /// Compiles `formula`; `ind_params` and `set_params` name the free
    /// variables whose values are passed to [`Program::run`].
    pub fn compile(
        structure: &FiniteStructure,
        formula: &Formula,
        regime: Regime,
        ind_params: &[String],
        set_params: &[String],
    ) -> Result<Program, EvalError> {
        let n = structure.size();
        let depth = formula.set_depth();
        if depth > 0 && n > 64 {
            return Err(EvalError::Resource(format!(
                "set quantification over {n} elements (at most 64 supported)"
            )));
        }
        if depth > MAX_SET_DEPTH && n > GUARD_UNIVERSE {
            return Err(EvalError::Resource(format!(
                "set quantifiers nested {depth} deep over {n} elements (limit: depth {MAX_SET_DEPTH} above {GUARD_UNIVERSE} elements)"
            )));
        }
        if depth > 0 && matches!(regime, Regime::Chain | Regime::Multichain) && structure.order().is_none() {
            return Err(EvalError::Unordered(regime));
        }
        let mut c = Compiler {
            structure,
            ind_params,
            set_params,
            inds: Vec::new(),
            sets: Vec::new(),
            max_inds: 0,
            max_sets: 0,
            rel_index: HashMap::new(),
            tables: Vec::new(),
            uses_order: false,
        };
        let root = c.node(formula)?;
        let order = if c.uses_order || regime == Regime::Chain {
            (0..n)
                .map(|a| (0..n).filter(|&b| structure.leq(a, b) == Some(true)).fold(0u64, |m, b| m | 1 << b))
                .collect()
        } else {
            Vec::new()
        };
        let range = if regime == Regime::Chain && depth > 0 {
            SetRange::Listed(chains(structure))
        } else if n >= 64 {
            SetRange::All(u64::MAX)
        } else {
            SetRange::All((1u64 << n) - 1)
        };
        Ok(Program {
            root,
            size: n,
            tables: c.tables,
            order,
            range,
            ind_slots: c.max_inds,
            set_slots: c.max_sets,
        })
    }

    pub fn run(&self, inds: &[usize], sets: &[u64]) -> bool {
        let mut env = Env {
            inds: vec![0; self.ind_slots],
            sets: vec![0; self.set_slots],
            ind_params: inds,
            set_params: sets,
        };
        self.eval(&self.root, &mut env)
    }

    fn term(&self, t: T, env: &Env) -> usize {
        match t {
            T::Slot(i) => env.inds[i],
            T::Param(i) => env.ind_params[i],
            T::Fixed(e) => e,
        }
    }

    fn eval(&self, node: &Node, env: &mut Env) -> bool {
        match node {
            Node::Bool(b) => *b,
            Node::Eq(a, b) => self.term(*a, env) == self.term(*b, env),
            Node::Leq(a, b) => self.order[self.term(*a, env)] >> self.term(*b, env) & 1 == 1,
            Node::Rel(r, ts) => match &self.tables[*r] {
                Table::Dense { arity, bits } => {
                    debug_assert_eq!(*arity, ts.len());
                    let idx = ts.iter().fold(0usize, |acc, &t| acc * self.size + self.term(t, env));
                    bits[idx / 64] >> (idx % 64) & 1 == 1
                }
                Table::Sparse(set) => {
                    let tuple: Vec<usize> = ts.iter().map(|&t| self.term(t, env)).collect();
                    set.contains(&tuple)
                }
            },
            Node::Mem(t, s) => {
                let e = self.term(*t, env);
                let mask = match *s {
                    S::Slot(i) => env.sets[i],
                    S::Param(i) => env.set_params[i],
                    S::Fixed(m) => m,
                };
                e < 64 && mask >> e & 1 == 1
            }
            Node::Not(g) => !self.eval(g, env),
            Node::And(parts) => parts.iter().all(|p| self.eval(p, env)),
            Node::ExistsInd(slot, body) => (0..self.size).any(|e| {
                env.inds[*slot] = e;
                self.eval(body, env)
            }),
            Node::ExistsSet(slot, body) => match &self.range {
                SetRange::All(full) => {
                    // submasks of `full` in increasing order
                    let mut m = 0u64;
                    loop {
                        env.sets[*slot] = m;
                        if self.eval(body, env) {
                            return true;
                        }
                        if m == *full {
                            return false;
                        }
                        m = (m | !*full).wrapping_add(1) & *full;
                    }
                }
                SetRange::Listed(masks) => masks.iter().any(|&m| {
                    env.sets[*slot] = m;
                    self.eval(body, env)
                }),
            },
        }
    }
}

struct Env<'a> {
    inds: Vec<usize>,
    sets: Vec<u64>,
    ind_params: &'a [usize],
    set_params: &'a [u64],
}
