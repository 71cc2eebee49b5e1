//! Finite relational structures and the Shelah-Stupp iteration over them.
//!
//! A [`FiniteStructure`] is the base `A` of every iteration. Its elements are
//! the indices `0..size`. Besides the relations of the signature it can carry
//! constants, an interpreted partial order (the designated symbol `leq`) and
//! named unary predicates. The last three are only used for the pointed,
//! ordered structures of the EF experiments and for expansions by transition
//! matrices; a *base* structure is purely relational.
//!
//! The iteration `A*` itself is never materialised. Its elements are
//! [`Word`]s, its order is [`prefix_leq`] and its lifted relations are
//! evaluated pointwise by [`eval_hat_relation`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the designated order symbol in structure files and formulas.
pub const ORDER_SYMBOL: &str = "leq";

/// Name of the iteration's root constant.
pub const ROOT_SYMBOL: &str = "root";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("relation `{0}` declared twice")]
    DuplicateRelation(String),
    #[error("relation `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("constant `{0}` declared twice")]
    DuplicateConstant(String),
    #[error("base signatures are purely relational, found constant `{0}`")]
    ConstantInBase(String),
    #[error("base signatures carry no order symbol `{ORDER_SYMBOL}`")]
    OrderInBase,
    #[error("tuple {tuple:?} of `{relation}` does not have arity {arity}")]
    TupleArity {
        relation: String,
        tuple: Vec<usize>,
        arity: usize,
    },
    #[error("element {element} out of range for a universe of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("duplicate tuple {tuple:?} in relation `{relation}`")]
    DuplicateTuple { relation: String, tuple: Vec<usize> },
    #[error("order is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("expected at least {expected} constants, found {found}")]
    ConstantCount { expected: usize, found: usize },
    #[error("an iterated product needs at least one factor")]
    EmptyPower,
    #[error("structure file: {0}")]
    Format(String),
}

/// Relation symbols with arities, constant symbols, and whether the
/// designated order `leq` is part of the vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    constants: Vec<String>,
    ordered: bool,
}

impl Signature {
    /// A purely relational signature, as required of iteration bases.
    pub fn base<I, S>(relations: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut sig = Signature::default();
        for (name, arity) in relations {
            sig.add_relation(name.into(), arity)?;
        }
        Ok(sig)
    }

    fn add_relation(&mut self, name: String, arity: usize) -> Result<(), StructureError> {
        if arity == 0 {
            return Err(StructureError::ZeroArity(name));
        }
        if name == ORDER_SYMBOL || self.relations.contains_key(&name) {
            return Err(StructureError::DuplicateRelation(name));
        }
        self.relations.insert(name, arity);
        Ok(())
    }

    /// The signature of the iteration: this one plus `leq` and the root constant.
    pub fn iteration(&self) -> Signature {
        Signature {
            relations: self.relations.clone(),
            constants: vec![ROOT_SYMBOL.to_string()],
            ordered: true,
        }
    }

    pub fn is_base(&self) -> bool {
        self.constants.is_empty() && !self.ordered
    }

    pub fn arity(&self, relation: &str) -> Option<usize> {
        self.relations.get(relation).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }
}

/// A finite structure over the universe `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    constants: Vec<usize>,
    order: Option<BTreeSet<(usize, usize)>>,
    predicates: BTreeMap<String, BTreeSet<usize>>,
}

impl FiniteStructure {
    /// An empty-signature structure with `size` elements.
    pub fn new(size: usize) -> Self {
        FiniteStructure {
            signature: Signature::default(),
            size,
            relations: BTreeMap::new(),
            constants: Vec::new(),
            order: None,
            predicates: BTreeMap::new(),
        }
    }

    fn check_element(&self, element: usize) -> Result<(), StructureError> {
        if element >= self.size {
            Err(StructureError::OutOfRange {
                element,
                size: self.size,
            })
        } else {
            Ok(())
        }
    }

    pub fn with_relation<I>(
        mut self,
        name: impl Into<String>,
        arity: usize,
        tuples: I,
    ) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let name = name.into();
        self.signature.add_relation(name.clone(), arity)?;
        let mut set = BTreeSet::new();
        for tuple in tuples {
            if tuple.len() != arity {
                return Err(StructureError::TupleArity {
                    relation: name,
                    tuple,
                    arity,
                });
            }
            for &e in &tuple {
                self.check_element(e)?;
            }
            if !set.insert(tuple.clone()) {
                return Err(StructureError::DuplicateTuple {
                    relation: name,
                    tuple,
                });
            }
        }
        self.relations.insert(name, set);
        Ok(self)
    }

    pub fn with_constant(
        mut self,
        name: impl Into<String>,
        element: usize,
    ) -> Result<Self, StructureError> {
        let name = name.into();
        self.check_element(element)?;
        if self.signature.constants.contains(&name) {
            return Err(StructureError::DuplicateConstant(name));
        }
        self.signature.constants.push(name);
        self.constants.push(element);
        Ok(self)
    }

    /// Installs `pairs` as the order. The pairs must already form a partial
    /// order (reflexive, antisymmetric, transitive).
    pub fn with_order<I>(mut self, pairs: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut order = BTreeSet::new();
        for (a, b) in pairs {
            self.check_element(a)?;
            self.check_element(b)?;
            order.insert((a, b));
        }
        check_partial_order(self.size, &order)?;
        self.signature.ordered = true;
        self.order = Some(order);
        Ok(self)
    }

    /// Installs the reflexive-transitive closure of `pairs` as the order.
    pub fn with_order_closure<I>(self, pairs: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let size = self.size;
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        for &(a, b) in &pairs {
            self.check_element(a)?;
            self.check_element(b)?;
        }
        pairs.extend((0..size).map(|i| (i, i)));
        let closed = transitive_closure(size, pairs);
        self.with_order(closed)
    }

    pub fn with_predicate<I>(mut self, name: impl Into<String>, members: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = BTreeSet::new();
        for e in members {
            self.check_element(e)?;
            set.insert(e);
        }
        self.predicates.insert(name.into(), set);
        Ok(self)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name)
    }

    pub fn holds(&self, name: &str, tuple: &[usize]) -> bool {
        self.relations.get(name).is_some_and(|r| r.contains(tuple))
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.signature
            .constants
            .iter()
            .position(|c| c == name)
            .map(|i| self.constants[i])
    }

    /// Constant values in declaration order.
    pub fn constant_values(&self) -> &[usize] {
        &self.constants
    }

    pub fn order(&self) -> Option<&BTreeSet<(usize, usize)>> {
        self.order.as_ref()
    }

    pub fn leq(&self, a: usize, b: usize) -> Option<bool> {
        self.order.as_ref().map(|o| o.contains(&(a, b)))
    }

    pub fn predicate(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.predicates.get(name)
    }

    pub fn predicates(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.predicates
    }

    /// Drops every constant after the first `keep`.
    pub fn truncate_constants(mut self, keep: usize) -> Self {
        self.signature.constants.truncate(keep);
        self.constants.truncate(keep);
        self
    }

    /// Renames the constants positionally; the count must match.
    pub fn rename_constants(mut self, names: &[&str]) -> Result<Self, StructureError> {
        if names.len() != self.constants.len() {
            return Err(StructureError::ConstantCount {
                expected: names.len(),
                found: self.constants.len(),
            });
        }
        self.signature.constants = names.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    /// The image of this structure under the bijection `perm` (old index to new index).
    pub fn relabel(&self, perm: &[usize]) -> FiniteStructure {
        assert_eq!(perm.len(), self.size, "permutation length");
        let map_tuple = |t: &Vec<usize>| t.iter().map(|&e| perm[e]).collect::<Vec<_>>();
        FiniteStructure {
            signature: self.signature.clone(),
            size: self.size,
            relations: self
                .relations
                .iter()
                .map(|(n, r)| (n.clone(), r.iter().map(map_tuple).collect()))
                .collect(),
            constants: self.constants.iter().map(|&c| perm[c]).collect(),
            order: self
                .order
                .as_ref()
                .map(|o| o.iter().map(|&(a, b)| (perm[a], perm[b])).collect()),
            predicates: self
                .predicates
                .iter()
                .map(|(n, s)| (n.clone(), s.iter().map(|&e| perm[e]).collect()))
                .collect(),
        }
    }

    /// Checks that `other` has the same vocabulary (relations, constant
    /// names, order, predicate names).
    pub fn same_vocabulary(&self, other: &FiniteStructure) -> Result<(), StructureError> {
        if self.signature != other.signature {
            return Err(StructureError::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.signature, other.signature
            )));
        }
        let mine: Vec<_> = self.predicates.keys().collect();
        let theirs: Vec<_> = other.predicates.keys().collect();
        if mine != theirs {
            return Err(StructureError::SignatureMismatch(format!(
                "predicates {mine:?} vs {theirs:?}"
            )));
        }
        Ok(())
    }

    /// Parses the JSON structure format.
    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let file: StructureFile =
            serde_json::from_str(text).map_err(|e| StructureError::Format(e.to_string()))?;
        let mut s = FiniteStructure::new(file.universe);
        for (name, rel) in file.relations {
            if name == ORDER_SYMBOL {
                if rel.arity != 2 {
                    return Err(StructureError::ArityMismatch {
                        relation: name,
                        expected: 2,
                        found: rel.arity,
                    });
                }
                let mut seen = BTreeSet::new();
                for t in &rel.tuples {
                    if t.len() != 2 {
                        return Err(StructureError::TupleArity {
                            relation: name,
                            tuple: t.clone(),
                            arity: 2,
                        });
                    }
                    if !seen.insert(t.clone()) {
                        return Err(StructureError::DuplicateTuple {
                            relation: name,
                            tuple: t.clone(),
                        });
                    }
                }
                s = s.with_order(rel.tuples.iter().map(|t| (t[0], t[1])))?;
            } else {
                s = s.with_relation(name, rel.arity, rel.tuples)?;
            }
        }
        let mut constants: Vec<(String, usize)> = file.constants.into_iter().collect();
        constants.sort_by_key(|(n, _)| n.clone());
        for (name, e) in constants {
            s = s.with_constant(name, e)?;
        }
        Ok(s)
    }

    /// Parses a structure that must be a valid iteration base.
    pub fn base_from_json(text: &str) -> Result<Self, StructureError> {
        let s = Self::from_json(text)?;
        s.ensure_base()?;
        Ok(s)
    }

    pub fn ensure_base(&self) -> Result<(), StructureError> {
        if let Some(c) = self.signature.constants.first() {
            return Err(StructureError::ConstantInBase(c.clone()));
        }
        if self.signature.ordered {
            return Err(StructureError::OrderInBase);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut relations = BTreeMap::new();
        for (name, tuples) in &self.relations {
            relations.insert(
                name.clone(),
                RelationFile {
                    arity: self.signature.relations[name],
                    tuples: tuples.iter().cloned().collect(),
                },
            );
        }
        if let Some(order) = &self.order {
            relations.insert(
                ORDER_SYMBOL.to_string(),
                RelationFile {
                    arity: 2,
                    tuples: order.iter().map(|&(a, b)| vec![a, b]).collect(),
                },
            );
        }
        let constants = self
            .signature
            .constants
            .iter()
            .cloned()
            .zip(self.constants.iter().copied())
            .collect();
        let file = StructureFile {
            universe: self.size,
            relations,
            constants,
        };
        serde_json::to_string_pretty(&file).expect("structure serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    universe: usize,
    #[serde(default)]
    relations: BTreeMap<String, RelationFile>,
    #[serde(default)]
    constants: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    arity: usize,
    tuples: Vec<Vec<usize>>,
}

fn check_partial_order(size: usize, order: &BTreeSet<(usize, usize)>) -> Result<(), StructureError> {
    for i in 0..size {
        if !order.contains(&(i, i)) {
            return Err(StructureError::NotPartialOrder(format!("{i} is not below itself")));
        }
    }
    for &(a, b) in order {
        if a != b && order.contains(&(b, a)) {
            return Err(StructureError::NotPartialOrder(format!(
                "{a} and {b} are below each other"
            )));
        }
    }
    for &(a, b) in order {
        for &(c, d) in order.range((b, 0)..(b + 1, 0)) {
            debug_assert_eq!(c, b);
            if !order.contains(&(a, d)) {
                return Err(StructureError::NotPartialOrder(format!(
                    "{a} <= {b} <= {d} but not {a} <= {d}"
                )));
            }
        }
    }
    Ok(())
}

/// Warshall closure of a relation on `0..size`.
pub fn transitive_closure<I>(size: usize, pairs: I) -> BTreeSet<(usize, usize)>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut m = vec![vec![false; size]; size];
    for (a, b) in pairs {
        m[a][b] = true;
    }
    for k in 0..size {
        for i in 0..size {
            if m[i][k] {
                for j in 0..size {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x {
                out.insert((i, j));
            }
        }
    }
    out
}

/// An element of the iteration: a finite sequence of base elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn epsilon() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn child(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// All prefixes, shortest first (`↓u`).
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.0.len()).map(move |i| Word(self.0[..i].to_vec()))
    }

    /// Whether every letter is below `size`.
    pub fn fits(&self, size: usize) -> bool {
        self.0.iter().all(|&a| a < size)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

/// Prefix order on finite words.
pub fn prefix_leq(u: &Word, v: &Word) -> bool {
    v.0.starts_with(&u.0)
}

/// All words over `0..alphabet` of length at most `max_len`, in length-lexicographic order.
pub fn words_up_to(alphabet: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::epsilon()];
    let mut frontier = vec![Word::epsilon()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet);
        for w in &frontier {
            for a in 0..alphabet {
                next.push(w.child(a));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Membership of `args` in the lifted relation `R̂ = {(ua_1,…,ua_n) | (a_1,…,a_n) ∈ R}`.
pub fn eval_hat_relation(
    base: &FiniteStructure,
    relation: &str,
    args: &[Word],
) -> Result<bool, StructureError> {
    let arity = base
        .signature
        .arity(relation)
        .ok_or_else(|| StructureError::UnknownRelation(relation.to_string()))?;
    if arity != args.len() {
        return Err(StructureError::ArityMismatch {
            relation: relation.to_string(),
            expected: arity,
            found: args.len(),
        });
    }
    Ok(hat_holds(base, relation, args))
}

pub(crate) fn hat_holds<W: AsRef<[usize]>>(base: &FiniteStructure, relation: &str, args: &[W]) -> bool {
    let first = args[0].as_ref();
    let Some((_, parent)) = first.split_last() else {
        return false;
    };
    let mut last = Vec::with_capacity(args.len());
    for w in args {
        let w = w.as_ref();
        match w.split_last() {
            Some((&a, p)) if p == parent => last.push(a),
            _ => return false,
        }
    }
    base.holds(relation, &last)
}

impl AsRef<[usize]> for Word {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

/// The product `A·B`: `A`'s second constant is glued to `B`'s first, orders
/// are joined and closed transitively, and the constants become `A`'s first
/// followed by `B`'s second onward (named as in `B`).
pub fn product(lhs: &FiniteStructure, rhs: &FiniteStructure) -> Result<FiniteStructure, StructureError> {
    glue(lhs, rhs, GluePoint::FirstConstant)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GluePoint {
    FirstConstant,
    /// Glues onto element 0 of the right factor regardless of its constants.
    /// Only used to mutation-test the congruence harness.
    ElementZero,
}

pub(crate) fn glue(
    lhs: &FiniteStructure,
    rhs: &FiniteStructure,
    point: GluePoint,
) -> Result<FiniteStructure, StructureError> {
    if lhs.constants.len() != 2 {
        return Err(StructureError::ConstantCount {
            expected: 2,
            found: lhs.constants.len(),
        });
    }
    if rhs.constants.is_empty() {
        return Err(StructureError::ConstantCount {
            expected: 1,
            found: 0,
        });
    }
    if lhs.signature.relations != rhs.signature.relations
        || !lhs.signature.ordered
        || !rhs.signature.ordered
    {
        return Err(StructureError::SignatureMismatch(
            "product factors need the same relations and an order".into(),
        ));
    }
    if lhs.predicates.keys().ne(rhs.predicates.keys()) {
        return Err(StructureError::SignatureMismatch(
            "product factors need the same unary predicates".into(),
        ));
    }
    let glued = match point {
        GluePoint::FirstConstant => rhs.constants[0],
        GluePoint::ElementZero => 0,
    };
    let offset = lhs.size;
    let map = |j: usize| -> usize {
        if j == glued {
            lhs.constants[1]
        } else if j < glued {
            offset + j
        } else {
            offset + j - 1
        }
    };
    let size = lhs.size + rhs.size - 1;
    let mut relations = BTreeMap::new();
    for (name, tuples) in &lhs.relations {
        let mut set = tuples.clone();
        for t in &rhs.relations[name] {
            set.insert(t.iter().map(|&e| map(e)).collect());
        }
        relations.insert(name.clone(), set);
    }
    let mut pairs: Vec<(usize, usize)> = lhs.order.as_ref().unwrap().iter().copied().collect();
    pairs.extend(rhs.order.as_ref().unwrap().iter().map(|&(a, b)| (map(a), map(b))));
    let order = transitive_closure(size, pairs);
    let mut predicates = BTreeMap::new();
    for (name, members) in &lhs.predicates {
        let mut set = members.clone();
        set.extend(rhs.predicates[name].iter().map(|&e| map(e)));
        predicates.insert(name.clone(), set);
    }
    let mut constants = vec![lhs.constants[0]];
    constants.extend(rhs.constants[1..].iter().map(|&c| map(c)));
    let out = FiniteStructure {
        signature: Signature {
            relations: lhs.signature.relations.clone(),
            constants: rhs.signature.constants.clone(),
            ordered: true,
        },
        size,
        relations,
        constants,
        order: Some(order),
        predicates,
    };
    if let Some(order) = &out.order {
        check_partial_order(size, order)?;
    }
    Ok(out)
}

/// The finite power `A·A·…·A` (`count` factors) with the final constant dropped.
pub fn iterated_product(factor: &FiniteStructure, count: usize) -> Result<FiniteStructure, StructureError> {
    if count < 1 {
        return Err(StructureError::EmptyPower);
    }
    if factor.constants.len() != 2 {
        return Err(StructureError::ConstantCount {
            expected: 2,
            found: factor.constants.len(),
        });
    }
    let mut acc = factor.clone();
    for _ in 1..count {
        acc = product(factor, &acc)?;
    }
    Ok(acc.truncate_constants(1))
}

/// Brute-force isomorphism search respecting constants (positionally),
/// relations, order and predicates. Exponential; meant for small structures.
pub fn find_isomorphism(a: &FiniteStructure, b: &FiniteStructure) -> Option<Vec<usize>> {
    if a.size != b.size || a.same_vocabulary(b).is_err() {
        return None;
    }
    let n = a.size;
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (&ca, &cb) in a.constants.iter().zip(&b.constants) {
        if perm[ca] != usize::MAX && perm[ca] != cb {
            return None;
        }
        if perm[ca] == usize::MAX && used[cb] {
            return None;
        }
        perm[ca] = cb;
        used[cb] = true;
    }
    fn search(
        i: usize,
        a: &FiniteStructure,
        b: &FiniteStructure,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == a.size {
            return a.relabel(perm) == *b;
        }
        if perm[i] != usize::MAX {
            return search(i + 1, a, b, perm, used);
        }
        for j in 0..a.size {
            if used[j] {
                continue;
            }
            perm[i] = j;
            used[j] = true;
            if search(i + 1, a, b, perm, used) {
                return true;
            }
            used[j] = false;
            perm[i] = usize::MAX;
        }
        false
    }
    if search(0, a, b, &mut perm, &mut used) {
        Some(perm)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FiniteStructure {
        FiniteStructure::new(n)
            .with_order_closure((1..n).map(|i| (i - 1, i)))
            .unwrap()
            .with_constant("c0", 0)
            .unwrap()
            .with_constant("c1", n - 1)
            .unwrap()
    }

    fn tree_base() -> FiniteStructure {
        FiniteStructure::new(2)
            .with_relation("R1", 1, vec![vec![0]])
            .unwrap()
            .with_relation("R2", 1, vec![vec![1]])
            .unwrap()
    }

    #[test]
    fn prefix_examples() {
        assert!(prefix_leq(&Word::epsilon(), &Word(vec![0, 1])));
        assert!(prefix_leq(&Word(vec![0]), &Word(vec![0, 1])));
        assert!(!prefix_leq(&Word(vec![0, 1]), &Word(vec![0])));
    }

    #[test]
    fn hat_relation_examples() {
        let base = tree_base();
        assert!(eval_hat_relation(&base, "R1", &[Word(vec![0, 1, 0])]).unwrap());
        assert!(!eval_hat_relation(&base, "R1", &[Word::epsilon()]).unwrap());
        let e = FiniteStructure::new(2)
            .with_relation("E", 2, vec![vec![0, 1]])
            .unwrap();
        assert!(eval_hat_relation(&e, "E", &[Word(vec![0, 0]), Word(vec![0, 1])]).unwrap());
        assert!(!eval_hat_relation(&e, "E", &[Word(vec![0, 0]), Word(vec![1, 1])]).unwrap());
        assert!(matches!(
            eval_hat_relation(&e, "E", &[Word(vec![0])]),
            Err(StructureError::ArityMismatch { .. })
        ));
        assert!(matches!(
            eval_hat_relation(&e, "F", &[Word(vec![0])]),
            Err(StructureError::UnknownRelation(_))
        ));
    }

    #[test]
    fn product_of_chains_is_a_chain() {
        let p = product(&chain(2), &chain(2)).unwrap();
        assert_eq!(p.size(), 3);
        let expected = chain(3);
        assert!(find_isomorphism(&p.clone().rename_constants(&["c0", "c1"]).unwrap(), &expected).is_some());
        assert_eq!(p.constant_values(), &[0, 3 - 1]);
    }

    #[test]
    fn product_with_a_point_is_identity_like() {
        let a = chain(3);
        let point = FiniteStructure::new(1)
            .with_order(vec![(0, 0)])
            .unwrap()
            .with_constant("c0", 0)
            .unwrap()
            .with_constant("c1", 0)
            .unwrap();
        let p = product(&a, &point).unwrap();
        assert!(find_isomorphism(&p, &a).is_some());
    }

    #[test]
    fn iterated_product_examples() {
        let p = iterated_product(&chain(2), 3).unwrap();
        assert_eq!(p.size(), 4);
        assert_eq!(p.constant_values().len(), 1);
        assert_eq!(p.order().unwrap().len(), 10);
        let one = iterated_product(&chain(2), 1).unwrap();
        assert_eq!(one.size(), 2);
        assert_eq!(one.constant_values(), &[0]);
        assert_eq!(iterated_product(&chain(2), 0), Err(StructureError::EmptyPower));
    }

    #[test]
    fn iterated_product_of_v_matches_closure_oracle() {
        // V shape: bottom 0 below 1 and 2; endpoints 1 and 2.
        let v = FiniteStructure::new(3)
            .with_order_closure(vec![(0, 1), (0, 2)])
            .unwrap()
            .with_constant("u", 1)
            .unwrap()
            .with_constant("v", 2)
            .unwrap();
        let p = iterated_product(&v, 2).unwrap();
        assert_eq!(p.size(), 5);
        // Independent oracle: element ids of the second copy are 3,4 with the
        // copy's constant u (old 1) glued to 2.
        let edges = vec![(0, 1), (0, 2), (3, 2), (3, 4)];
        let mut reach = vec![vec![false; 5]; 5];
        for i in 0..5 {
            reach[i][i] = true;
        }
        for &(a, b) in &edges {
            reach[a][b] = true;
        }
        loop {
            let mut changed = false;
            for i in 0..5 {
                for j in 0..5 {
                    for k in 0..5 {
                        if reach[i][j] && reach[j][k] && !reach[i][k] {
                            reach[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let count = reach.iter().flatten().filter(|&&b| b).count();
        assert_eq!(p.order().unwrap().len(), count);
        assert_eq!(count, 9);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(matches!(
            FiniteStructure::new(2).with_order(vec![(0, 1)]),
            Err(StructureError::NotPartialOrder(_))
        ));
        assert!(matches!(
            FiniteStructure::new(2).with_order(vec![(0, 0), (1, 1), (0, 1), (1, 0)]),
            Err(StructureError::NotPartialOrder(_))
        ));
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let text = r#"{"universe": 2, "relations": {"R1": {"arity": 1, "tuples": [[0]]}}}"#;
        let s = FiniteStructure::base_from_json(text).unwrap();
        assert!(s.holds("R1", &[0]));
        let again = FiniteStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);

        let dup = r#"{"universe": 2, "relations": {"R1": {"arity": 1, "tuples": [[0],[0]]}}}"#;
        assert!(matches!(
            FiniteStructure::from_json(dup),
            Err(StructureError::DuplicateTuple { .. })
        ));
        let unknown = r#"{"universe": 2, "relatons": {}}"#;
        assert!(matches!(FiniteStructure::from_json(unknown), Err(StructureError::Format(_))));
        let with_const = r#"{"universe": 2, "constants": {"c": 1}}"#;
        assert!(matches!(
            FiniteStructure::base_from_json(with_const),
            Err(StructureError::ConstantInBase(_))
        ));
        let range = r#"{"universe": 2, "relations": {"R": {"arity": 1, "tuples": [[2]]}}}"#;
        assert!(matches!(
            FiniteStructure::from_json(range),
            Err(StructureError::OutOfRange { .. })
        ));
    }

    #[test]
    fn words_enumeration_counts() {
        assert_eq!(words_up_to(2, 3).len(), 15);
        assert_eq!(words_up_to(0, 3).len(), 1);
    }
}
