//! Rank-`m` equivalence of finite structures by type computation.
//!
//! The rank-0 type of an assignment is its atomic diagram over the
//! constants and assigned elements (equality, order, relations, predicates
//! and membership in assigned sets). The rank-`(i+1)` type is the diagram
//! together with the sets of rank-`i` types of all one-element and all
//! one-set extensions the regime allows. Two structures are `≡_m` iff
//! their rank-`m` types of the empty assignment coincide.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::evaluator::chains;
use crate::formulas::Regime;
use crate::structures::{glue, product, FiniteStructure, GluePoint, StructureError};

/// Largest universe for which set moves are enumerated.
pub const MAX_SET_UNIVERSE: usize = 20;
/// Largest number of leaf assignments a type computation may visit.
pub const MAX_LEAVES: f64 = 2e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EfError {
    #[error("signature mismatch: {0}")]
    Signature(String),
    #[error("regime `{0}` needs ordered structures")]
    Unordered(Regime),
    #[error("set moves over {0} elements exceed the limit of {MAX_SET_UNIVERSE}")]
    TooLarge(usize),
    #[error("rank {rank} over {moves} moves per round exceeds the work limit")]
    TooExpensive { moves: usize, rank: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Hash, PartialEq, Eq)]
struct TypeKey {
    rank: usize,
    diagram: Vec<u64>,
    elements: Vec<u32>,
    sets: Vec<u32>,
}

/// Interned types; ids are comparable across structures of one vocabulary.
#[derive(Default)]
pub struct TypeTable {
    ids: HashMap<TypeKey, u32>,
}

struct Moves<'s> {
    s: &'s FiniteStructure,
    relations: Vec<(&'s str, usize)>,
    sets: Vec<u64>,
}

impl TypeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct types interned so far.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// The rank-`m` type of `s` with nothing assigned.
    pub fn type_of(&mut self, s: &FiniteStructure, m: usize, regime: Regime) -> Result<u32, EfError> {
        if matches!(regime, Regime::Chain | Regime::Multichain) && !s.signature().is_ordered() {
            return Err(EfError::Unordered(regime));
        }
        let sets = match regime {
            Regime::Fo => Vec::new(),
            _ if m == 0 => Vec::new(),
            _ if s.size() > MAX_SET_UNIVERSE => return Err(EfError::TooLarge(s.size())),
            Regime::Chain => chains(s),
            _ => (0..1u64 << s.size()).collect(),
        };
        let per_round = s.size() + sets.len();
        if (per_round as f64).powi(m as i32) > MAX_LEAVES {
            return Err(EfError::TooExpensive { moves: per_round, rank: m });
        }
        let moves = Moves {
            s,
            relations: s.signature().relations().collect(),
            sets,
        };
        Ok(self.go(&moves, &mut Vec::new(), &mut Vec::new(), m))
    }

    fn go(&mut self, mv: &Moves, elems: &mut Vec<usize>, sets: &mut Vec<u64>, rank: usize) -> u32 {
        let diagram = diagram(mv, elems, sets);
        let mut element_types = BTreeSet::new();
        let mut set_types = BTreeSet::new();
        if rank > 0 {
            for e in 0..mv.s.size() {
                elems.push(e);
                element_types.insert(self.go(mv, elems, sets, rank - 1));
                elems.pop();
            }
            for &x in &mv.sets {
                sets.push(x);
                set_types.insert(self.go(mv, elems, sets, rank - 1));
                sets.pop();
            }
        }
        let key = TypeKey {
            rank,
            diagram,
            elements: element_types.into_iter().collect(),
            sets: set_types.into_iter().collect(),
        };
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }
}

fn diagram(mv: &Moves, elems: &[usize], sets: &[u64]) -> Vec<u64> {
    let s = mv.s;
    let list: Vec<usize> = s.constant_values().iter().chain(elems).copied().collect();
    let mut bits = Vec::new();
    for &a in &list {
        for &b in &list {
            bits.push(a == b);
            if let Some(le) = s.leq(a, b) {
                bits.push(le);
            }
        }
    }
    for &(name, arity) in &mv.relations {
        let mut tuple = vec![0; arity];
        let total = list.len().pow(arity as u32);
        for code in 0..total {
            let mut c = code;
            for slot in tuple.iter_mut() {
                *slot = list[c % list.len()];
                c /= list.len();
            }
            bits.push(s.holds(name, &tuple));
        }
    }
    for members in s.predicates().values() {
        bits.extend(list.iter().map(|a| members.contains(a)));
    }
    for &x in sets {
        bits.extend(list.iter().map(|&a| x >> a & 1 == 1));
    }
    let mut packed = vec![bits.len() as u64];
    packed.extend(bits.chunks(64).map(|c| c.iter().enumerate().fold(0u64, |w, (i, &b)| w | (b as u64) << i)));
    packed
}

/// Whether `a` and `b` satisfy the same sentences of rank at most `m`.
pub fn ef_equiv(a: &FiniteStructure, b: &FiniteStructure, m: usize, regime: Regime) -> Result<bool, EfError> {
    a.same_vocabulary(b).map_err(|e| EfError::Signature(e.to_string()))?;
    let mut table = TypeTable::new();
    Ok(table.type_of(a, m, regime)? == table.type_of(b, m, regime)?)
}

/// A random poset on `size` elements with one binary relation `R`, one
/// predicate `L1` and `constants` random constants `c1, c2, …`.
pub fn random_structure(rng: &mut impl Rng, size: usize, constants: usize) -> FiniteStructure {
    let mut perm: Vec<usize> = (0..size).collect();
    perm.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 0..size {
        for j in i + 1..size {
            if rng.gen_bool(0.4) {
                pairs.push((perm[i], perm[j]));
            }
        }
    }
    let rel: Vec<Vec<usize>> = (0..size)
        .flat_map(|a| (0..size).map(move |b| vec![a, b]))
        .filter(|_| rng.gen_bool(0.25))
        .collect();
    let pred: Vec<usize> = (0..size).filter(|_| rng.gen_bool(0.5)).collect();
    let mut s = FiniteStructure::new(size)
        .with_relation("R", 2, rel)
        .and_then(|s| s.with_order_closure(pairs))
        .and_then(|s| s.with_predicate("L1", pred))
        .expect("generated structure is well formed");
    for c in 0..constants {
        s = s
            .with_constant(format!("c{}", c + 1), rng.gen_range(0..size))
            .expect("fresh constant");
    }
    s
}

fn relabeled(rng: &mut impl Rng, s: &FiniteStructure) -> FiniteStructure {
    let mut perm: Vec<usize> = (0..s.size()).collect();
    perm.shuffle(rng);
    s.relabel(&perm)
}

/// Picks `count` pairs of equivalent structures: half are relabelings,
/// half are distinct members of one type class of a random pool.
fn equivalent_pairs(
    rng: &mut impl Rng,
    sizes: std::ops::RangeInclusive<usize>,
    constants: usize,
    m: usize,
    regime: Regime,
    count: usize,
) -> Result<Vec<(FiniteStructure, FiniteStructure)>, EfError> {
    let mut table = TypeTable::new();
    let mut classes: HashMap<u32, Vec<FiniteStructure>> = HashMap::new();
    for _ in 0..count * 3 {
        let size = rng.gen_range(sizes.clone());
        let s = random_structure(rng, size, constants);
        classes.entry(table.type_of(&s, m, regime)?).or_default().push(s);
    }
    let mut keys: Vec<u32> = classes.keys().copied().collect();
    keys.sort_unstable();
    let rich: Vec<&Vec<FiniteStructure>> = keys.iter().map(|k| &classes[k]).filter(|c| c.len() >= 2).collect();
    let all: Vec<&FiniteStructure> = keys.iter().flat_map(|k| &classes[k]).collect();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 2 == 0 || rich.is_empty() {
            let s = all[rng.gen_range(0..all.len())];
            out.push((s.clone(), relabeled(rng, s)));
        } else {
            let class = rich[rng.gen_range(0..rich.len())];
            let pick: Vec<&FiniteStructure> = class.choose_multiple(rng, 2).collect();
            out.push((pick[0].clone(), pick[1].clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    pub checked: usize,
    /// Quadruples whose factors are equivalent but not isomorphic.
    pub non_isomorphic: usize,
    pub violations: Vec<String>,
}

/// Samples `A ≡ A'` (two constants) and `B ≡ B'` (one or two constants),
/// with `|A| + |B| - 1 ≤ size_cap`, and checks `A·B ≡ A'·B'` at rank `m`.
pub fn check_product_congruence(samples: usize, size_cap: usize, m: usize, seed: u64) -> Result<CongruenceReport, EfError> {
    congruence_with(samples, size_cap, m, seed, GluePoint::FirstConstant)
}

/// The same harness over a product that glues onto element 0 of the right
/// factor instead of its first constant; it should report violations.
pub fn check_broken_product_congruence(samples: usize, size_cap: usize, m: usize, seed: u64) -> Result<CongruenceReport, EfError> {
    congruence_with(samples, size_cap, m, seed, GluePoint::ElementZero)
}

fn congruence_with(samples: usize, size_cap: usize, m: usize, seed: u64, point: GluePoint) -> Result<CongruenceReport, EfError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regime = Regime::Multichain;
    let left_max = size_cap.div_ceil(2).max(1);
    let right_max = (size_cap + 1).saturating_sub(left_max).max(1);
    let lefts = equivalent_pairs(&mut rng, 1..=left_max, 2, m, regime, samples)?;
    let mut rights = [
        equivalent_pairs(&mut rng, 1..=right_max, 1, m, regime, samples.div_ceil(2))?,
        equivalent_pairs(&mut rng, 1..=right_max, 2, m, regime, samples / 2)?,
    ];
    let mut report = CongruenceReport {
        checked: 0,
        non_isomorphic: 0,
        violations: Vec::new(),
    };
    let mut table = TypeTable::new();
    for (i, (a, a2)) in lefts.into_iter().enumerate() {
        let (b, b2) = rights[i % 2].pop().expect("one right pair per sample");
        let lhs = glue(&a, &b, point)?;
        let rhs = glue(&a2, &b2, point)?;
        if crate::structures::find_isomorphism(&a, &a2).is_none() || crate::structures::find_isomorphism(&b, &b2).is_none() {
            report.non_isomorphic += 1;
        }
        report.checked += 1;
        if table.type_of(&lhs, m, regime)? != table.type_of(&rhs, m, regime)? {
            report.violations.push(format!(
                "sample {i}: A {} | A' {} | B {} | B' {}",
                a.to_json(),
                a2.to_json(),
                b.to_json(),
                b2.to_json()
            ));
        }
    }
    Ok(report)
}

/// Finite truncations of the trees built from `T_ω`, the words over
/// `ℕ × ℕ` whose second components strictly decrease.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// `T_ω` itself.
    Omega,
    /// `T_∞ = a*T_ω`; its truncation cuts the spine at `a^n`, so it coincides
    /// with that of `a^{≤n}T_ω`.
    Infinity,
    /// `a^{≤n}T_ω`.
    SpineUpTo,
}

/// The truncation with first components below `width`, second components
/// below `depth` and (except for `Omega`) spine `ε, a, …, a^n`, as a poset
/// under the prefix order with constant `root`. Node 0 is the root.
pub fn truncated_tree(kind: TreeKind, depth: usize, width: usize, n: usize) -> FiniteStructure {
    // Parent pointers of one copy of truncated T_ω, root first.
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut frontier = vec![(0usize, depth)];
    while let Some((node, below)) = frontier.pop() {
        for m in 0..below {
            for _ in 0..width {
                parents.push(Some(node));
                frontier.push((parents.len() - 1, m));
            }
        }
    }
    let spine = if kind == TreeKind::Omega { 0 } else { n };
    let copy = parents.len();
    let mut edges = Vec::new();
    for i in 0..=spine {
        let offset = i * copy;
        if i > 0 {
            edges.push((offset - copy, offset));
        }
        for (j, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                edges.push((offset + p, offset + j));
            }
        }
    }
    tree_from_edges(copy * (spine + 1), edges)
}

fn tree_from_edges(size: usize, edges: Vec<(usize, usize)>) -> FiniteStructure {
    FiniteStructure::new(size)
        .with_order_closure(edges)
        .and_then(|s| s.with_constant("root", 0))
        .expect("trees are partial orders")
}

/// `S ·_v T`: `T`'s root is identified with node `v` of `S`. Both trees
/// carry their root as only constant.
pub fn graft(s: &FiniteStructure, v: usize, t: &FiniteStructure) -> Result<FiniteStructure, EfError> {
    let pointed = s.clone().with_constant("graft", v)?;
    Ok(product(&pointed, t)?)
}

/// A random rooted tree on `size` nodes with root 0.
pub fn random_tree(rng: &mut impl Rng, size: usize) -> FiniteStructure {
    let edges = (1..size).map(|j| (rng.gen_range(0..j), j)).collect();
    tree_from_edges(size, edges)
}

#[derive(Debug, Clone, Serialize)]
pub struct GraftReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Samples trees `S, T ≡^w_k T'` and nodes `v` with `|S| + |T| - 1 ≤ size_cap`
/// and checks `S ·_v T ≡^w_k S ·_v T'`.
pub fn check_graft_congruence(samples: usize, size_cap: usize, k: usize, seed: u64) -> Result<GraftReport, EfError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GraftReport {
        checked: 0,
        violations: Vec::new(),
    };
    let mut table = TypeTable::new();
    let t_max = size_cap.div_ceil(2).max(1);
    let mut pool: HashMap<u32, Vec<FiniteStructure>> = HashMap::new();
    let mut order = Vec::new();
    for _ in 0..samples * 3 {
        let size = rng.gen_range(1..=t_max);
        let t = random_tree(&mut rng, size);
        let id = table.type_of(&t, k, Regime::Weak)?;
        if !pool.contains_key(&id) {
            order.push(id);
        }
        pool.entry(id).or_default().push(t);
    }
    let rich: Vec<u32> = order.iter().copied().filter(|id| pool[id].len() >= 2).collect();
    for i in 0..samples {
        let (t, t2) = if i % 2 == 0 || rich.is_empty() {
            let class = &pool[&order[rng.gen_range(0..order.len())]];
            let t = class[rng.gen_range(0..class.len())].clone();
            (t.clone(), t)
        } else {
            let class = &pool[&rich[rng.gen_range(0..rich.len())]];
            let pick: Vec<&FiniteStructure> = class.choose_multiple(&mut rng, 2).collect();
            (pick[0].clone(), pick[1].clone())
        };
        let s_max = (size_cap + 1 - t.size().max(t2.size())).max(1);
        let size = rng.gen_range(1..=s_max);
        let s = random_tree(&mut rng, size);
        let v = rng.gen_range(0..s.size());
        let lhs = graft(&s, v, &t)?;
        let rhs = graft(&s, v, &t2)?;
        report.checked += 1;
        if table.type_of(&lhs, k, Regime::Weak)? != table.type_of(&rhs, k, Regime::Weak)? {
            report.violations.push(format!("sample {i}: S {} at {v} | T {} | T' {}", s.to_json(), t.to_json(), t2.to_json()));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeDemo {
    pub depth: usize,
    pub width: usize,
    pub m: usize,
    pub omega_nodes: usize,
    pub spine_nodes: usize,
    /// Truncated `T_ω` against truncated `a^{≤1}T_ω` under weak MSO.
    pub equivalent: bool,
}

/// A finite-scale illustration only: truncation changes both trees.
pub fn demo_trees(depth: usize, width: usize, m: usize) -> Result<TreeDemo, EfError> {
    let omega = truncated_tree(TreeKind::Omega, depth, width, 0);
    let spine = truncated_tree(TreeKind::SpineUpTo, depth, width, 1);
    Ok(TreeDemo {
        depth,
        width,
        m,
        omega_nodes: omega.size(),
        spine_nodes: spine.size(),
        equivalent: ef_equiv(&omega, &spine, m, Regime::Weak)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{hintikka_bound, BigBound};
    use crate::structures::{words_up_to, Signature};

    fn chain(n: usize) -> FiniteStructure {
        FiniteStructure::new(n).with_order_closure((1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn chains_of_two_and_three() {
        assert!(ef_equiv(&chain(2), &chain(3), 1, Regime::Full).unwrap());
        assert!(!ef_equiv(&chain(2), &chain(3), 3, Regime::Fo).unwrap());
        assert!(!ef_equiv(&chain(2), &chain(3), 2, Regime::Fo).unwrap());
        // Linear orders of length at least 2^m - 1 agree at rank m.
        assert!(ef_equiv(&chain(7), &chain(8), 3, Regime::Fo).unwrap());
        assert!(!ef_equiv(&chain(6), &chain(7), 3, Regime::Fo).unwrap());
    }

    #[test]
    fn reflexive_and_regime_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for regime in [Regime::Fo, Regime::Chain, Regime::Multichain, Regime::Weak, Regime::Full] {
            let s = random_structure(&mut rng, 4, 1);
            assert!(ef_equiv(&s, &s, 2, regime).unwrap());
            assert!(ef_equiv(&s, &relabeled(&mut rng, &s), 2, regime).unwrap());
        }
        let big = truncated_tree(TreeKind::SpineUpTo, 2, 2, 1);
        assert!(matches!(ef_equiv(&big, &big, 2, Regime::Weak), Err(EfError::TooExpensive { .. })));
        let unordered = FiniteStructure::new(2);
        assert_eq!(ef_equiv(&unordered, &unordered, 1, Regime::Chain), Err(EfError::Unordered(Regime::Chain)));
        let other = FiniteStructure::new(2).with_predicate("P", [0]).unwrap();
        assert!(matches!(ef_equiv(&unordered, &other, 1, Regime::Fo), Err(EfError::Signature(_))));
    }

    #[test]
    fn equivalence_laws_and_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let family: Vec<FiniteStructure> = (0..12).map(|i| random_structure(&mut rng, 1 + i % 3, 1)).collect();
        for regime in [Regime::Fo, Regime::Chain, Regime::Full] {
            for m in 0..2 {
                let eq = |a: &FiniteStructure, b: &FiniteStructure, m| ef_equiv(a, b, m, regime).unwrap();
                for a in &family {
                    for b in &family {
                        assert_eq!(eq(a, b, m), eq(b, a, m));
                        if eq(a, b, m + 1) {
                            assert!(eq(a, b, m));
                        }
                        for c in &family {
                            if eq(a, b, m) && eq(b, c, m) {
                                assert!(eq(a, c, m));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tree_counts() {
        let t = truncated_tree(TreeKind::Omega, 1, 2, 0);
        assert_eq!(t.size(), 3);
        assert_eq!(t.order().unwrap().len(), 3 + 2);
        // Independent count: words over pairs (letter, m) with decreasing m.
        for (depth, width) in [(2, 2), (3, 1), (2, 3)] {
            let pairs: Vec<(usize, usize)> = (0..width).flat_map(|a| (0..depth).map(move |m| (a, m))).collect();
            let count = words_up_to(pairs.len(), depth)
                .iter()
                .filter(|w| w.letters().windows(2).all(|p| pairs[p[0]].1 > pairs[p[1]].1))
                .count();
            assert_eq!(truncated_tree(TreeKind::Omega, depth, width, 0).size(), count);
            assert_eq!(truncated_tree(TreeKind::SpineUpTo, depth, width, 2).size(), 3 * count);
        }
        assert_eq!(
            truncated_tree(TreeKind::Infinity, 2, 2, 1),
            truncated_tree(TreeKind::SpineUpTo, 2, 2, 1)
        );
    }

    #[test]
    fn graft_shape() {
        let s = truncated_tree(TreeKind::Omega, 1, 1, 0);
        let t = truncated_tree(TreeKind::Omega, 1, 2, 0);
        let g = graft(&s, 1, &t).unwrap();
        assert_eq!(g.size(), 4);
        assert_eq!(g.constant_values(), &[0]);
        assert_eq!(g.order().unwrap().iter().filter(|(a, _)| *a == 1).count(), 3);
    }

    #[test]
    fn small_congruence_runs() {
        let r = check_product_congruence(20, 5, 1, 3).unwrap();
        assert_eq!(r.checked, 20);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        let g = check_graft_congruence(20, 6, 1, 3).unwrap();
        assert!(g.violations.is_empty(), "{:?}", g.violations);
    }

    #[test]
    fn type_counts_below_hintikka_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = Signature::base([("R", 2)]).unwrap();
        for m in 0..2 {
            let mut table = TypeTable::new();
            let mut seen = BTreeSet::new();
            for _ in 0..40 {
                let s = FiniteStructure::new(rng.gen_range(1..4))
                    .with_relation("R", 2, [vec![0, 0]])
                    .unwrap();
                seen.insert(table.type_of(&s, m, Regime::Full).unwrap());
            }
            assert!(hintikka_bound(&sig, 0, m) >= BigBound::from_u64(seen.len() as u64));
        }
    }
}
