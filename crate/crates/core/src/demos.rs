//! Two self-checking worked examples: the complete binary tree as the
//! iteration of a two-element base, and Cayley graphs of free products of
//! monoids defined in the iteration of the disjoint union of the factors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{eval, EvalError};
use crate::formulas::{parse_formula, parse_sentence, Formula, ParseError, Regime};
use crate::oracle::{oracle_eval, oracle_eval_at, replay, OracleConfig, OracleError};
use crate::structures::{words_up_to, FiniteStructure, StructureError, Word};
use crate::translator::{translate, AutomatonContext, BoundPolicy, OverrideBounds, TranslateError};

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("invalid monoid: {0}")]
    Monoid(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `({0,1}, R1 = {0}, R2 = {1})`, whose iteration is the binary tree with
/// left and right children marked.
pub fn binary_tree_base() -> FiniteStructure {
    FiniteStructure::new(2)
        .with_relation("R1", 1, [vec![0]])
        .and_then(|s| s.with_relation("R2", 1, [vec![1]]))
        .expect("fixed base")
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeRow {
    pub sentence: String,
    pub expected: bool,
    pub translated: bool,
    pub oracle: bool,
    pub bound_hit: bool,
    /// Whether a true oracle verdict replays from its witnesses.
    pub replayed: bool,
}

impl TreeRow {
    pub fn agrees(&self) -> bool {
        self.translated == self.expected && self.oracle == self.expected && (!self.oracle || self.replayed)
    }
}

/// Sentence, expected truth value, override bounds `(k, Λ)`.
///
/// Each sentence keeps its truth value when individuals are restricted to
/// words of length at most `Λ` and sets to `k`-state automata: universal
/// statements are about every node, and existential ones have witnesses
/// within the bounds (`0`, `0.0`, `0.1`, `{ε}`).
pub const TREE_CORPUS: &[(&str, bool, usize, usize)] = &[
    (
        "(fo (forall x (implies (not (= x root)) (or (and (hat R1 x) (not (hat R2 x))) (and (hat R2 x) (not (hat R1 x)))))))",
        true,
        1,
        2,
    ),
    ("(fo (not (or (hat R1 root) (hat R2 root))))", true, 1, 1),
    ("(fo (hat R1 root))", false, 1, 1),
    ("(fo (exists x (exists y (and (not (= x y)) (and (hat R1 x) (hat R1 y))))))", true, 1, 2),
    ("(fo (exists x (and (hat R2 x) (exists y (and (leq y x) (and (not (= y x)) (hat R1 y)))))))", true, 1, 2),
    ("(fo (exists x (and (hat R1 x) (hat R2 x))))", false, 1, 2),
    ("(mch (exists-set X (and (in root X) (forall x (implies (in x X) (= x root))))))", true, 2, 1),
];

pub fn demo_binary_tree() -> Result<Vec<TreeRow>, DemoError> {
    let base = binary_tree_base();
    let mut rows = Vec::new();
    for &(text, expected, k, len) in TREE_CORPUS {
        let s = parse_sentence(text)?;
        let policy = BoundPolicy::Override(OverrideBounds::new(k, len));
        let t = translate(&s, &AutomatonContext::new(), &policy, base.signature())?;
        let translated = eval(&base, &t.formula, Regime::Weak)?;
        let cfg = OracleConfig::new(s.regime, 3, 2, 1);
        let out = oracle_eval(&base, &s.formula, &cfg)?;
        let replayed = out.verdict && replay(&base, &s.formula, &cfg, &out);
        rows.push(TreeRow {
            sentence: text.to_string(),
            expected,
            translated,
            oracle: out.verdict,
            bound_hit: out.bound_hit,
            replayed,
        });
    }
    Ok(rows)
}

/// A finite monoid given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monoid {
    pub size: usize,
    pub identity: usize,
    pub table: Vec<Vec<usize>>,
    /// Generator names; they label the Cayley edges.
    pub generators: BTreeMap<String, usize>,
}

impl Monoid {
    /// `ℤ/n` with generator `name` for 1.
    pub fn cyclic(n: usize, name: &str) -> Monoid {
        Monoid {
            size: n,
            identity: 0,
            table: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
            generators: [(name.to_string(), 1 % n)].into(),
        }
    }

    pub fn from_json(text: &str) -> Result<Monoid, DemoError> {
        let m: Monoid = serde_json::from_str(text).map_err(|e| DemoError::Monoid(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), DemoError> {
        let bad = |msg: String| Err(DemoError::Monoid(msg));
        let n = self.size;
        if n == 0 || self.identity >= n {
            return bad("needs a nonempty carrier containing the identity".into());
        }
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad(format!("table must be {n}×{n} over 0..{n}"));
        }
        for a in 0..n {
            if self.mul(self.identity, a) != a || self.mul(a, self.identity) != a {
                return bad(format!("{} is not an identity for {a}", self.identity));
            }
            for b in 0..n {
                for c in 0..n {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return bad(format!("not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        for (name, &g) in &self.generators {
            if g >= n {
                return bad(format!("generator `{name}` is out of range"));
            }
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return bad(format!("generator name `{name}` must be alphanumeric"));
            }
        }
        Ok(())
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }
}

/// Elements of the free product in normal form: non-identity elements of
/// alternating factors, as `(factor, element)`.
pub type NormalForm = Vec<(usize, usize)>;

/// `v · g` for `g` an element of factor `i`.
pub fn nf_multiply(monoids: &[Monoid], v: &NormalForm, i: usize, g: usize) -> NormalForm {
    let mut out = v.clone();
    match out.last().copied() {
        Some((j, a)) if j == i => {
            let merged = monoids[i].mul(a, g);
            out.pop();
            if merged != monoids[i].identity {
                out.push((i, merged));
            }
        }
        _ if g == monoids[i].identity => {}
        _ => out.push((i, g)),
    }
    out
}

/// The disjoint union of the rooted Cayley graphs with predicates `M{i}`,
/// the unit set `U` and edge relations `E{i}_{a}`. Factor `i` occupies a
/// contiguous block of elements.
pub fn cayley_union(monoids: &[Monoid]) -> Result<(FiniteStructure, Vec<usize>), DemoError> {
    let mut offsets = Vec::new();
    let mut total = 0;
    for m in monoids {
        m.validate()?;
        offsets.push(total);
        total += m.size;
    }
    let mut s = FiniteStructure::new(total);
    for (i, m) in monoids.iter().enumerate() {
        let o = offsets[i];
        s = s.with_relation(format!("M{}", i + 1), 1, (0..m.size).map(|a| vec![o + a]))?;
        for (name, &g) in &m.generators {
            let edges = (0..m.size).map(|a| vec![o + a, o + m.mul(a, g)]);
            s = s.with_relation(format!("E{}_{}", i + 1, name), 2, edges)?;
        }
    }
    let units = monoids.iter().zip(&offsets).map(|(m, &o)| vec![o + m.identity]);
    s = s.with_relation("U", 1, units)?;
    Ok((s, offsets))
}

const SUCC: &str = "(and (leq X Y) (and (not (= X Y)) (forall z (implies (leq z Y) (or (leq z X) (= z Y))))))";

fn succ(x: &str, y: &str) -> String {
    SUCC.replace('X', x).replace('Y', y)
}

/// Membership in the free product for the word `w`. Besides forbidding a
/// unit or a same-factor letter after any letter, the first letter must not
/// be a unit.
pub fn membership_formula(factors: usize) -> Result<Formula, DemoError> {
    let mut parts = vec![format!(
        "(forall y (implies (and (leq y w) {}) (not (hat U y))))",
        succ("root", "y")
    )];
    for i in 1..=factors {
        parts.push(format!(
            "(forall y (implies (leq y w) (forall x (implies {} (implies (hat M{i} x) (and (not (hat M{i} y)) (not (hat U y))))))))",
            succ("x", "y")
        ));
    }
    let text = parts.into_iter().reduce(|a, b| format!("(and {a} {b})")).expect("at least one part");
    Ok(parse_formula(&text)?)
}

/// `v ∘ a = w` for generator `a` of factor `i` (1-based).
pub fn edge_formula(i: usize, generator: &str) -> Result<Formula, DemoError> {
    let e = format!("E{i}_{generator}");
    let text = format!(
        "(or (exists v1 (and (hat U v1) (and {} (hat {e} v1 w)))) (or (hat {e} v w) (exists w1 (and (hat U w1) (and {} (hat {e} v w1))))))",
        succ("v", "v1"),
        succ("w", "w1"),
    );
    Ok(parse_formula(&text)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeProductReport {
    pub words_checked: usize,
    /// Members of the free product by word length.
    pub members_by_length: Vec<usize>,
    pub edges_checked: usize,
    pub edges_present: usize,
    /// Edge refutations reported with `bound_hit`; exact because every
    /// witness the edge formula needs is a child of `v` or `w`, of length at
    /// most `d`.
    pub bounded_refutations: usize,
    pub replay_failures: usize,
    pub mismatches: Vec<String>,
}

impl FreeProductReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.replay_failures == 0
    }
}

/// Checks membership of all words of length at most `member_len` and all
/// Cayley edges between members of length at most `edge_len` against the
/// normal-form engine.
pub fn demo_free_product(monoids: &[Monoid], member_len: usize, edge_len: usize) -> Result<FreeProductReport, DemoError> {
    let (base, offsets) = cayley_union(monoids)?;
    let decode = |letter: usize| -> (usize, usize) {
        let i = offsets.iter().rposition(|&o| o <= letter).expect("offsets start at 0");
        (i, letter - offsets[i])
    };
    let is_normal = |w: &Word| -> bool {
        let letters: Vec<(usize, usize)> = w.letters().iter().map(|&a| decode(a)).collect();
        letters.iter().all(|&(i, a)| a != monoids[i].identity) && letters.windows(2).all(|p| p[0].0 != p[1].0)
    };
    let member = membership_formula(monoids.len())?;
    let cfg = OracleConfig::new(Regime::Fo, member_len.max(edge_len + 1), 0, 0);
    let mut report = FreeProductReport {
        words_checked: 0,
        members_by_length: vec![0; member_len + 1],
        edges_checked: 0,
        edges_present: 0,
        bounded_refutations: 0,
        replay_failures: 0,
        mismatches: Vec::new(),
    };
    let mut members = Vec::new();
    for w in words_up_to(base.size(), member_len) {
        let out = oracle_eval_at(&base, &member, &cfg, &[], &[("w", w.clone())])?;
        report.words_checked += 1;
        if out.verdict && !replay(&base, &member, &cfg, &out) {
            report.replay_failures += 1;
        }
        if out.bound_hit {
            report.mismatches.push(format!("membership of {w} was not decided exactly"));
        }
        if out.verdict != is_normal(&w) {
            report.mismatches.push(format!("membership of {w}: formula {}, normal form {}", out.verdict, !out.verdict));
        }
        if out.verdict {
            report.members_by_length[w.len()] += 1;
            if w.len() <= edge_len {
                members.push(w);
            }
        }
    }
    let nf = |w: &Word| -> NormalForm { w.letters().iter().map(|&a| decode(a)).collect() };
    for (i, m) in monoids.iter().enumerate() {
        for (name, &g) in &m.generators {
            let edge = edge_formula(i + 1, name)?;
            for v in &members {
                let target = nf_multiply(monoids, &nf(v), i, g);
                for w in &members {
                    let out = oracle_eval_at(&base, &edge, &cfg, &[], &[("v", v.clone()), ("w", w.clone())])?;
                    report.edges_checked += 1;
                    if out.verdict {
                        report.edges_present += 1;
                        if !replay(&base, &edge, &cfg, &out) {
                            report.replay_failures += 1;
                        }
                    } else if out.bound_hit {
                        report.bounded_refutations += 1;
                    }
                    if out.verdict != (nf(w) == target) {
                        report
                            .mismatches
                            .push(format!("edge {v} -{name}-> {w}: formula {}, normal form {}", out.verdict, !out.verdict));
                    }
                }
            }
        }
    }
    Ok(report)
}
