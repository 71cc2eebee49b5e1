//! Bounded evaluation of iteration sentences directly over `A*`.
//!
//! Individuals range over words of length at most `d`; set variables range
//! over the languages of automata with at most `b` states (over every
//! sub-alphabet) and over explicit sets of at most `c` words of length at
//! most `d`, filtered by the regime. Two searches are exact regardless of
//! `d`:
//!
//! * an individual quantifier whose body is quantifier-free. Beyond the
//!   longest word `u` in scope, the body only sees the prefix of length
//!   `|u|`, the last letter and the state vector of the automata in scope,
//!   so one representative per reachable combination suffices;
//! * an individual quantifier whose body has a conjunct `x ⪯ t` or `x = t`.
//!
//! Everything else is bounded, and a `false` that no exact search decided
//! is reported with `bound_hit`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::automata::{enumerate_dfas, finite_language_dfa, sub_alphabets, AutomatonError, Dfa};
use crate::formulas::{Formula, Regime, Term};
use crate::structures::{hat_holds, prefix_leq, words_up_to, FiniteStructure, Word};
use crate::translator::AutomatonContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Word-length bound.
    pub d: usize,
    /// State bound for automaton-presented sets.
    pub b: usize,
    /// Cardinality bound for explicit finite sets.
    pub c: usize,
    pub regime: Regime,
    /// Decide innermost individual quantifiers by state-vector search
    /// instead of the plain length bound.
    pub exact_innermost: bool,
}

impl OracleConfig {
    pub fn new(regime: Regime, d: usize, b: usize, c: usize) -> Self {
        OracleConfig {
            d,
            b,
            c,
            regime,
            exact_innermost: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("`{0}` is not an iteration-side symbol")]
    NotIterationSide(String),
    #[error("free individual variable `{0}`")]
    FreeIndividual(String),
    #[error("free set variable `{0}` has no value")]
    FreeSet(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {expected}, applied to {found} arguments")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("set quantifier in a first-order sentence")]
    SetInFo,
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Where a set value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetOrigin {
    Given(String),
    Automaton,
    Finite(Vec<Word>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetValue {
    pub dfa: Dfa,
    pub origin: SetOrigin,
}

impl SetValue {
    fn to_json(&self) -> Json {
        match &self.origin {
            SetOrigin::Given(name) => json!({ "given": name }),
            SetOrigin::Automaton => {
                json!({ "automaton": serde_json::from_str::<Json>(&self.dfa.to_json()).expect("automaton JSON") })
            }
            SetOrigin::Finite(words) => json!({ "finite": words.iter().map(Word::to_string).collect::<Vec<_>>() }),
        }
    }
}

/// A value of a variable; sets index the outcome's set table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Word(Word),
    Set(usize),
}

/// Quantifier node (pre-order index among quantifiers) and the values of
/// the variables in scope there, outermost first.
pub type WitnessKey = (usize, Vec<(String, Value)>);

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub verdict: bool,
    pub bound_hit: bool,
    /// Skolem tables of every existential search that succeeded.
    pub witnesses: BTreeMap<WitnessKey, Value>,
    /// Given sets first, then the candidates of set quantifiers.
    pub sets: Vec<SetValue>,
    pub given: usize,
    /// Words assigned to free individual variables.
    pub given_words: Vec<(String, Word)>,
}

impl OracleOutcome {
    pub fn set_candidates(&self) -> std::ops::Range<usize> {
        self.given..self.sets.len()
    }

    fn value_json(&self, v: &Value) -> Json {
        match v {
            Value::Word(w) => json!(w.to_string()),
            Value::Set(i) => self.sets[*i].to_json(),
        }
    }

    pub fn to_json(&self) -> Json {
        let witnesses: Vec<Json> = self
            .witnesses
            .iter()
            .map(|((node, scope), value)| {
                let scope: serde_json::Map<String, Json> =
                    scope.iter().map(|(n, v)| (n.clone(), self.value_json(v))).collect();
                json!({ "node": node, "scope": scope, "value": self.value_json(value) })
            })
            .collect();
        json!({ "verdict": self.verdict, "bound_hit": self.bound_hit, "witnesses": witnesses })
    }
}

/// `n + 1` for `n` the product of the context's state counts.
pub fn pumping_cutoff(ctx: &AutomatonContext) -> usize {
    ctx.state_counts().iter().product::<usize>() + 1
}

/// Evaluates a sentence.
pub fn oracle_eval(
    base: &FiniteStructure,
    sentence: &Formula,
    cfg: &OracleConfig,
) -> Result<OracleOutcome, OracleError> {
    oracle_eval_with(base, sentence, cfg, &[])
}

/// Evaluates a formula whose free set variables are given automata.
pub fn oracle_eval_with(
    base: &FiniteStructure,
    formula: &Formula,
    cfg: &OracleConfig,
    given: &[(&str, &Dfa)],
) -> Result<OracleOutcome, OracleError> {
    oracle_eval_at(base, formula, cfg, given, &[])
}

/// Evaluates a formula with free set variables bound to automata and free
/// individual variables bound to words.
pub fn oracle_eval_at(
    base: &FiniteStructure,
    formula: &Formula,
    cfg: &OracleConfig,
    given: &[(&str, &Dfa)],
    words: &[(&str, Word)],
) -> Result<OracleOutcome, OracleError> {
    check(base, formula, cfg, given, words)?;
    let mut sets: Vec<SetValue> = given
        .iter()
        .map(|(n, d)| SetValue {
            dfa: (*d).clone(),
            origin: SetOrigin::Given(n.to_string()),
        })
        .collect();
    if formula.has_set_quantifier() {
        sets.extend(set_candidates(base.size(), cfg)?);
    }
    let mut engine = Engine::new(base, formula, cfg, sets, given.len());
    let given_words: Vec<(String, Word)> = words.iter().map(|(n, w)| (n.to_string(), w.clone())).collect();
    let mut env = initial_env(given.iter().map(|(n, _)| n.to_string()), &given_words);
    let (verdict, bound_hit) = engine.eval(formula, &mut env);
    Ok(OracleOutcome {
        verdict,
        bound_hit,
        witnesses: engine.witnesses,
        sets: engine.sets,
        given: given.len(),
        given_words,
    })
}

fn initial_env(sets: impl Iterator<Item = String>, words: &[(String, Word)]) -> Vec<(String, Value)> {
    sets.enumerate()
        .map(|(i, n)| (n, Value::Set(i)))
        .chain(words.iter().map(|(n, w)| (n.clone(), Value::Word(w.clone()))))
        .collect()
}

fn check(
    base: &FiniteStructure,
    formula: &Formula,
    cfg: &OracleConfig,
    given: &[(&str, &Dfa)],
    words: &[(&str, Word)],
) -> Result<(), OracleError> {
    let (inds, sets) = formula.free_vars();
    if let Some(x) = inds.into_iter().find(|x| !words.iter().any(|(n, _)| n == x)) {
        return Err(OracleError::FreeIndividual(x));
    }
    if let Some(x) = sets.into_iter().find(|s| !given.iter().any(|(n, _)| n == s)) {
        return Err(OracleError::FreeSet(x));
    }
    if let Some((_, w)) = words.iter().find(|(_, w)| !w.fits(base.size())) {
        return Err(OracleError::NotIterationSide(format!("word {w}")));
    }
    if cfg.regime == Regime::Fo && formula.has_set_quantifier() {
        return Err(OracleError::SetInFo);
    }
    let mut errors = Vec::new();
    formula.visit(&mut |f| match f {
        Formula::Rel(r, _) => errors.push(OracleError::NotIterationSide(format!("rel {r}"))),
        Formula::HatRel(r, ts) => match base.signature().arity(r) {
            None => errors.push(OracleError::UnknownRelation(r.clone())),
            Some(a) if a != ts.len() => errors.push(OracleError::Arity {
                relation: r.clone(),
                expected: a,
                found: ts.len(),
            }),
            _ => {}
        },
        Formula::Eq(s, t) | Formula::PrefLeq(s, t) => {
            for t in [s, t] {
                if let Term::Const(c) = t {
                    errors.push(OracleError::NotIterationSide(format!("const {c}")));
                }
            }
        }
        _ => {}
    });
    errors.into_iter().next().map_or(Ok(()), Err)
}

fn regime_admits(regime: Regime, dfa: &Dfa) -> bool {
    match regime {
        Regime::Fo | Regime::Full => true,
        Regime::Weak => dfa.is_finite_language(),
        Regime::Chain => dfa.is_chain_language(),
        Regime::Multichain => dfa.is_multichain_language(),
    }
}

/// The set candidates of a regime, automata first.
///
/// Automata are deduplicated by their words of length at most `2b`; two
/// automata with at most `b` states each (plus a sink for missing letters)
/// that agree that far have the same language.
pub fn set_candidates(size: usize, cfg: &OracleConfig) -> Result<Vec<SetValue>, OracleError> {
    let letters: Vec<usize> = (0..size).collect();
    let probe = words_up_to(size, 2 * cfg.b);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for sub in sub_alphabets(&letters) {
        for dfa in enumerate_dfas(&sub, cfg.b) {
            if !regime_admits(cfg.regime, &dfa) {
                continue;
            }
            let key: Vec<bool> = probe.iter().map(|w| dfa.accepts(w.letters())).collect();
            if seen.insert(key) {
                out.push(SetValue {
                    dfa,
                    origin: SetOrigin::Automaton,
                });
            }
        }
    }
    let pool = words_up_to(size, cfg.d);
    let mut chosen = Vec::new();
    finite_sets(&pool, cfg.c, 0, &mut chosen, &mut |words| {
        let dfa = finite_language_dfa(words, &letters)?;
        if regime_admits(cfg.regime, &dfa) {
            out.push(SetValue {
                dfa,
                origin: SetOrigin::Finite(words.to_vec()),
            });
        }
        Ok(())
    })?;
    Ok(out)
}

fn finite_sets(
    pool: &[Word],
    c: usize,
    from: usize,
    chosen: &mut Vec<Word>,
    emit: &mut impl FnMut(&[Word]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    emit(chosen)?;
    if chosen.len() == c {
        return Ok(());
    }
    for i in from..pool.len() {
        chosen.push(pool[i].clone());
        finite_sets(pool, c, i + 1, chosen, emit)?;
        chosen.pop();
    }
    Ok(())
}

fn quantifier_indices(formula: &Formula) -> HashMap<*const Formula, usize> {
    let mut map = HashMap::new();
    formula.visit(&mut |f| {
        if matches!(f, Formula::ExistsInd(..) | Formula::ExistsSet(..)) {
            let n = map.len();
            map.insert(f as *const Formula, n);
        }
    });
    map
}

fn lookup<'e>(env: &'e [(String, Value)], name: &str) -> &'e Value {
    &env.iter().rev().find(|(n, _)| n == name).expect("variables checked before evaluation").1
}

fn word_of(env: &[(String, Value)], t: &Term) -> Word {
    match t {
        Term::Root => Word::epsilon(),
        Term::Var(v) => match lookup(env, v) {
            Value::Word(w) => w.clone(),
            Value::Set(_) => unreachable!("individual variable bound to a set"),
        },
        Term::Const(_) => unreachable!("constants rejected before evaluation"),
    }
}

fn set_of(env: &[(String, Value)], name: &str) -> usize {
    match lookup(env, name) {
        Value::Set(i) => *i,
        Value::Word(_) => unreachable!("set variable bound to a word"),
    }
}

/// Atoms, evaluated directly on words.
fn atom(base: &FiniteStructure, sets: &[SetValue], f: &Formula, env: &[(String, Value)]) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(s, t) => word_of(env, s) == word_of(env, t),
        Formula::PrefLeq(s, t) => prefix_leq(&word_of(env, s), &word_of(env, t)),
        Formula::HatRel(r, ts) => {
            let words: Vec<Word> = ts.iter().map(|t| word_of(env, t)).collect();
            hat_holds(base, r, &words)
        }
        Formula::Mem(t, x) => sets[set_of(env, x)].dfa.accepts(word_of(env, t).letters()),
        other => unreachable!("not an atom: {other:?}"),
    }
}

fn conjuncts<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        Formula::Not(g) => match g.as_ref() {
            Formula::Not(h) => conjuncts(h, out),
            _ => out.push(f),
        },
        _ => out.push(f),
    }
}

/// Finite candidate lists forced by a conjunct `x ⪯ t` or `x = t`.
fn hinted(x: &str, body: &Formula, env: &[(String, Value)]) -> Option<Vec<Word>> {
    let mut parts = Vec::new();
    conjuncts(body, &mut parts);
    let other = |t: &Term| !matches!(t, Term::Var(v) if v == x);
    let is_x = |t: &Term| matches!(t, Term::Var(v) if v == x);
    for p in parts {
        match p {
            Formula::PrefLeq(s, t) if is_x(s) && other(t) => return Some(word_of(env, t).prefixes().collect()),
            Formula::Eq(s, t) if is_x(s) && other(t) => return Some(vec![word_of(env, t)]),
            Formula::Eq(s, t) if is_x(t) && other(s) => return Some(vec![word_of(env, s)]),
            _ => {}
        }
    }
    None
}

fn mentioned_sets(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    f.visit(&mut |g| {
        if let Formula::Mem(_, x) = g {
            out.insert(x.clone());
        }
    });
    out
}

struct Engine<'a> {
    base: &'a FiniteStructure,
    cfg: &'a OracleConfig,
    sets: Vec<SetValue>,
    given: usize,
    nodes: HashMap<*const Formula, usize>,
    witnesses: BTreeMap<WitnessKey, Value>,
    bounded_words: Vec<Word>,
}

impl<'a> Engine<'a> {
    fn new(base: &'a FiniteStructure, formula: &Formula, cfg: &'a OracleConfig, sets: Vec<SetValue>, given: usize) -> Self {
        Engine {
            base,
            cfg,
            sets,
            given,
            nodes: quantifier_indices(formula),
            witnesses: BTreeMap::new(),
            bounded_words: words_up_to(base.size(), cfg.d),
        }
    }

    /// `(value, bound_hit)`.
    fn eval(&mut self, f: &Formula, env: &mut Vec<(String, Value)>) -> (bool, bool) {
        match f {
            Formula::Not(g) => {
                let (v, hit) = self.eval(g, env);
                (!v, hit)
            }
            Formula::And(a, b) => {
                let (va, ha) = self.eval(a, env);
                if !va {
                    return (false, ha);
                }
                let (vb, hb) = self.eval(b, env);
                (vb, if vb { ha || hb } else { hb })
            }
            Formula::ExistsInd(x, body) => {
                let (candidates, exact) = self.word_candidates(x, body, env);
                let values: Vec<Value> = candidates.into_iter().map(Value::Word).collect();
                self.search(f, x, body, values, exact, env)
            }
            Formula::ExistsSet(x, body) => {
                let values: Vec<Value> = (self.given..self.sets.len()).map(Value::Set).collect();
                self.search(f, x, body, values, false, env)
            }
            atom_formula => (atom(self.base, &self.sets, atom_formula, env), false),
        }
    }

    fn search(
        &mut self,
        node: &Formula,
        x: &str,
        body: &Formula,
        values: Vec<Value>,
        exact: bool,
        env: &mut Vec<(String, Value)>,
    ) -> (bool, bool) {
        let mut hit = !exact;
        for v in values {
            env.push((x.to_string(), v.clone()));
            let (ok, h) = self.eval(body, env);
            env.pop();
            if ok {
                let index = self.nodes[&(node as *const Formula)];
                self.witnesses.insert((index, env.clone()), v);
                return (true, h);
            }
            hit |= h;
        }
        (false, hit)
    }

    fn word_candidates(&self, x: &str, body: &Formula, env: &[(String, Value)]) -> (Vec<Word>, bool) {
        if let Some(words) = hinted(x, body, env) {
            return (words, true);
        }
        if self.cfg.exact_innermost && body.is_quantifier_free() {
            return (self.representatives(body, env), true);
        }
        (self.bounded_words.clone(), false)
    }

    /// One word per behaviour of `x` in a quantifier-free body: all words
    /// of length at most `M + 1`, and for each prefix `u` of length `M` one
    /// word `u v a` (`v` nonempty) per reachable pair of state vector and
    /// last letter, where `M` bounds the words in scope.
    fn representatives(&self, body: &Formula, env: &[(String, Value)]) -> Vec<Word> {
        let size = self.base.size();
        let m = env
            .iter()
            .filter_map(|(_, v)| match v {
                Value::Word(w) => Some(w.len()),
                Value::Set(_) => None,
            })
            .max()
            .unwrap_or(0);
        let mut out = words_up_to(size, m + 1);
        if size == 0 {
            return out;
        }
        let dfas: Vec<&Dfa> = mentioned_sets(body)
            .iter()
            .map(|x| &self.sets[set_of(env, x)].dfa)
            .collect();
        let step = |vector: &[Option<usize>], a: usize| -> Vec<Option<usize>> {
            vector
                .iter()
                .zip(&dfas)
                .map(|(q, d)| q.and_then(|q| d.step(q, a)))
                .collect()
        };
        for u in out.clone().into_iter().filter(|w| w.len() == m) {
            let start: Vec<Option<usize>> = dfas.iter().map(|d| d.run(u.letters())).collect();
            // Vectors reachable by nonempty words, with a shortest witness.
            let mut seen: HashMap<Vec<Option<usize>>, Vec<usize>> = HashMap::new();
            let mut queue = VecDeque::new();
            for a in 0..size {
                let next = step(&start, a);
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), vec![a]);
                    queue.push_back(next);
                }
            }
            while let Some(vector) = queue.pop_front() {
                let path = seen[&vector].clone();
                for a in 0..size {
                    let next = step(&vector, a);
                    if !seen.contains_key(&next) {
                        let mut p = path.clone();
                        p.push(a);
                        seen.insert(next.clone(), p);
                        queue.push_back(next);
                    }
                }
            }
            let mut done = HashSet::new();
            let mut paths: Vec<(&Vec<Option<usize>>, &Vec<usize>)> = seen.iter().collect();
            paths.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.1.cmp(b.1)));
            for (vector, v) in paths {
                for a in 0..size {
                    if done.insert((step(vector, a), a)) {
                        let mut w = u.letters().to_vec();
                        w.extend_from_slice(v);
                        w.push(a);
                        out.push(Word(w));
                    }
                }
            }
        }
        out
    }
}

/// Re-checks a true verdict from its witnesses alone.
///
/// Existential quantifiers in positive position take the recorded witness
/// for the current scope (none recorded means false); those in negative
/// position are searched over words of length at most `d` (or the words a
/// conjunct `x ⪯ t`, `x = t` allows) and the outcome's set candidates,
/// all of which the oracle's own search covers.
pub fn replay(base: &FiniteStructure, formula: &Formula, cfg: &OracleConfig, outcome: &OracleOutcome) -> bool {
    let nodes = quantifier_indices(formula);
    let words = words_up_to(base.size(), cfg.d);
    let names = outcome.sets[..outcome.given].iter().map(|s| match &s.origin {
        SetOrigin::Given(n) => n.clone(),
        _ => unreachable!("given sets come first"),
    });
    let mut env = initial_env(names, &outcome.given_words);
    let r = Replay {
        base,
        outcome,
        nodes,
        words,
    };
    r.eval(formula, &mut env, true)
}

struct Replay<'a> {
    base: &'a FiniteStructure,
    outcome: &'a OracleOutcome,
    nodes: HashMap<*const Formula, usize>,
    words: Vec<Word>,
}

impl Replay<'_> {
    fn eval(&self, f: &Formula, env: &mut Vec<(String, Value)>, positive: bool) -> bool {
        match f {
            Formula::Not(g) => !self.eval(g, env, !positive),
            Formula::And(a, b) => self.eval(a, env, positive) && self.eval(b, env, positive),
            Formula::ExistsInd(x, body) | Formula::ExistsSet(x, body) => {
                if positive {
                    let key = (self.nodes[&(f as *const Formula)], env.clone());
                    let Some(v) = self.outcome.witnesses.get(&key) else {
                        return false;
                    };
                    env.push((x.clone(), v.clone()));
                    let ok = self.eval(body, env, true);
                    env.pop();
                    ok
                } else {
                    let values: Vec<Value> = if matches!(f, Formula::ExistsInd(..)) {
                        hinted(x, body, env)
                            .unwrap_or_else(|| self.words.clone())
                            .into_iter()
                            .map(Value::Word)
                            .collect()
                    } else {
                        self.outcome.set_candidates().map(Value::Set).collect()
                    };
                    values.into_iter().any(|v| {
                        env.push((x.clone(), v));
                        let ok = self.eval(body, env, false);
                        env.pop();
                        ok
                    })
                }
            }
            atom_formula => atom(self.base, &self.outcome.sets, atom_formula, env),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::singleton_dfa;
    use crate::formulas::parse_sentence;
    use proptest::prelude::*;

    fn tree_base() -> FiniteStructure {
        FiniteStructure::new(2)
            .with_relation("R1", 1, [vec![0]])
            .unwrap()
            .with_relation("R2", 1, [vec![1]])
            .unwrap()
    }

    fn run(text: &str, base: &FiniteStructure, d: usize, b: usize, c: usize) -> OracleOutcome {
        let s = parse_sentence(text).unwrap();
        let cfg = OracleConfig::new(s.regime, d, b, c);
        let out = oracle_eval(base, &s.formula, &cfg).unwrap();
        if out.verdict {
            assert!(replay(base, &s.formula, &cfg, &out), "replay failed for {text}");
        }
        out
    }

    #[test]
    fn documented_examples() {
        let base = tree_base();
        let out = run("(fo (exists x (hat R1 x)))", &base, 3, 0, 0);
        assert_eq!((out.verdict, out.bound_hit), (true, false));
        assert_eq!(out.witnesses.values().next(), Some(&Value::Word(Word(vec![0]))));
        let out = run(
            "(ch (exists-set X (and (in root X) (exists x (and (in x X) (not (= x root)))))))",
            &base,
            2,
            2,
            0,
        );
        assert!(out.verdict);
        let out = run("(fo (forall x (leq root x)))", &base, 2, 0, 0);
        assert_eq!((out.verdict, out.bound_hit), (true, false));
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(pumping_cutoff(&AutomatonContext::new()), 2);
        let ctx = AutomatonContext::new()
            .with_entry("X", 2, 0, [1])
            .unwrap()
            .with_entry("Y", 3, 0, [])
            .unwrap();
        assert_eq!(pumping_cutoff(&ctx), 7);
    }

    #[test]
    fn bounded_refutation_is_flagged() {
        let base = tree_base();
        // Every word has a child outside its prefixes; the outer search is
        // unbounded, so the refutation is only up to d.
        let out = run("(fo (exists x (forall y (leq y x))))", &base, 2, 0, 0);
        assert_eq!((out.verdict, out.bound_hit), (false, true));
        let out = run("(fo (exists x (and (leq x root) (hat R1 x))))", &base, 2, 0, 0);
        assert_eq!((out.verdict, out.bound_hit), (false, false));
    }

    #[test]
    fn long_witnesses_found_by_state_search() {
        let base = tree_base();
        let target = singleton_dfa(&Word(vec![1, 1, 1, 1, 0, 1]), &[0, 1]).unwrap();
        let s = parse_sentence("(mch (exists x (and (in x X) (hat R2 x))))").unwrap();
        let cfg = OracleConfig::new(Regime::Multichain, 1, 0, 0);
        let out = oracle_eval_with(&base, &s.formula, &cfg, &[("X", &target)]).unwrap();
        assert_eq!((out.verdict, out.bound_hit), (true, false));
        assert!(replay(&base, &s.formula, &cfg, &out));
        let bounded = OracleConfig {
            exact_innermost: false,
            ..cfg
        };
        let out = oracle_eval_with(&base, &s.formula, &bounded, &[("X", &target)]).unwrap();
        assert_eq!((out.verdict, out.bound_hit), (false, true));
    }

    #[test]
    fn candidates_respect_regime() {
        for regime in [Regime::Chain, Regime::Multichain, Regime::Weak] {
            let cfg = OracleConfig::new(regime, 2, 2, 2);
            for s in set_candidates(2, &cfg).unwrap() {
                let ok = match regime {
                    Regime::Chain => s.dfa.is_chain_language(),
                    Regime::Multichain => s.dfa.is_multichain_language(),
                    _ => s.dfa.is_finite_language(),
                };
                assert!(ok);
            }
        }
    }

    #[test]
    fn candidate_languages_are_distinct() {
        let cfg = OracleConfig::new(Regime::Full, 0, 2, 0);
        let cands = set_candidates(2, &cfg).unwrap();
        let automata: Vec<&SetValue> = cands.iter().filter(|s| s.origin == SetOrigin::Automaton).collect();
        let probe = words_up_to(2, 6);
        let keys: HashSet<Vec<bool>> = automata
            .iter()
            .map(|s| probe.iter().map(|w| s.dfa.accepts(w.letters())).collect())
            .collect();
        assert_eq!(keys.len(), automata.len());
    }

    #[test]
    fn errors() {
        let base = tree_base();
        let cfg = OracleConfig::new(Regime::Fo, 1, 1, 1);
        let s = parse_sentence("(fo (exists x (hat R3 x)))").unwrap();
        assert!(matches!(oracle_eval(&base, &s.formula, &cfg), Err(OracleError::UnknownRelation(_))));
        let free = Formula::mem(Term::Root, "X");
        assert!(matches!(oracle_eval(&base, &free, &cfg), Err(OracleError::FreeSet(_))));
        let free = Formula::eq(Term::var("x"), Term::Root);
        assert!(matches!(oracle_eval(&base, &free, &cfg), Err(OracleError::FreeIndividual(_))));
    }

    #[test]
    fn json_output_shape() {
        let base = tree_base();
        let out = run("(mch (exists-set X (exists x (and (in x X) (hat R2 x)))))", &base, 1, 1, 1);
        let j = out.to_json();
        assert_eq!(j["verdict"], json!(true));
        assert!(j["witnesses"].as_array().is_some_and(|w| w.len() == 2));
    }

    fn rank_one_sentence() -> impl Strategy<Value = String> {
        let atom = prop_oneof![
            Just("(hat R1 x)".to_string()),
            Just("(hat R2 x)".to_string()),
            Just("(in x X)".to_string()),
            Just("(in x Y)".to_string()),
            Just("(= x root)".to_string()),
        ];
        let body = atom.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| format!("(not {a})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("(and {a} {b})")),
            ]
        });
        (any::<bool>(), body).prop_map(|(all, b)| {
            if all {
                format!("(mch (forall x {b}))")
            } else {
                format!("(mch (exists x {b}))")
            }
        })
    }

    fn random_dfa(seed: u64, states: usize) -> Dfa {
        let table: Vec<Vec<usize>> = (0..states)
            .map(|q| (0..2).map(|a| ((seed >> (q * 4 + a * 2)) as usize) % states).collect())
            .collect();
        let finals: Vec<usize> = (0..states).filter(|q| seed >> (20 + q) & 1 == 1).collect();
        Dfa::new(states, vec![0, 1], 0, table, finals).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn cutoff_search_agrees(text in rank_one_sentence(), sx in any::<u64>(), sy in any::<u64>()) {
            let base = tree_base();
            let (x, y) = (random_dfa(sx, 2), random_dfa(sy, 3));
            let ctx = AutomatonContext::new().with_entry("X", 2, 0, x.finals()).unwrap()
                .with_entry("Y", 3, 0, y.finals()).unwrap();
            let s = parse_sentence(&text).unwrap();
            let given = [("X", &x), ("Y", &y)];
            let exact = oracle_eval_with(&base, &s.formula, &OracleConfig::new(s.regime, 0, 0, 0), &given).unwrap();
            let cutoff = pumping_cutoff(&ctx);
            for d in [cutoff, cutoff + 3] {
                let mut cfg = OracleConfig::new(s.regime, d, 0, 0);
                cfg.exact_innermost = false;
                let bounded = oracle_eval_with(&base, &s.formula, &cfg, &given).unwrap();
                prop_assert_eq!(bounded.verdict, exact.verdict);
            }
        }
    }

    #[test]
    fn monotone_in_bounds() {
        let corpus = [
            "(ch (exists-set X (and (in root X) (exists x (and (in x X) (hat R1 x))))))",
            "(mch (exists-set X (exists x (and (in x X) (not (= x root))))))",
            "(w (exists-set X (exists x (exists y (and (in x X) (and (in y X) (not (= x y))))))))",
            "(fo (exists x (and (hat R2 x) (exists y (and (leq y x) (hat R1 y))))))",
            "(ch (exists-set X (exists x (and (in x X) (and (hat R2 x) (not (leq x root)))))))",
            "(fo (exists x (exists y (and (hat R1 x) (and (hat R2 y) (not (leq x y)))))))",
        ];
        let base = tree_base();
        for text in corpus {
            let s = parse_sentence(text).unwrap();
            let mut previous = false;
            for (d, b, c) in [(0, 0, 0), (1, 1, 1), (2, 1, 2), (2, 2, 2)] {
                let out = oracle_eval(&base, &s.formula, &OracleConfig::new(s.regime, d, b, c)).unwrap();
                assert!(!previous || out.verdict, "{text} at {d},{b},{c}");
                previous = out.verdict;
            }
            assert!(previous, "{text}");
        }
    }
}
