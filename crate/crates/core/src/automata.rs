//! Complete DFAs over alphabets drawn from the base universe.
//!
//! A [`Dfa`] reads words of the iteration. Its alphabet `B` is a subset of
//! the base universe; a word using a letter outside `B` is rejected, so the
//! language of a DFA is always a subset of `B*` ⊆ `A*`.
//!
//! # Classifying languages through `↓L`
//!
//! The classifiers [`Dfa::is_chain_language`] and
//! [`Dfa::is_multichain_language`] look at branching points of the prefix
//! closure `↓L`, not of `L`. A word `u` branches in `↓L` when two distinct
//! one-letter extensions `ua`, `ub` lie in `↓L`; for a run this means
//! `ι.u` has two letters leading to coaccessible states.
//!
//! * `L` is a chain iff `↓L` is, iff no word of `↓L` branches.
//! * A tree covered by `j` chains has at most `j − 1` branching points, and a
//!   finitely branching tree with finitely many branching points is a finite
//!   union of its maximal branches. So `L` is a multichain iff `↓L` has
//!   finitely many branching points, iff no branching state is reached by
//!   infinitely many words, i.e. lies behind a reachable cycle.
//!
//! The branching points of `L` itself are not enough: `a*b` has none inside
//! `L` while every `aⁿ` branches in `↓L`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structures::Word;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("state {0} out of range")]
    StateOutOfRange(usize),
    #[error("alphabet letters must be distinct")]
    DuplicateLetter,
    #[error("an automaton with more than one state needs a nonempty alphabet")]
    EmptyAlphabet,
    #[error("transition row {state} has {found} entries, expected {expected}")]
    RowLength {
        state: usize,
        expected: usize,
        found: usize,
    },
    #[error("letter {0} is not in the alphabet")]
    LetterOutsideAlphabet(usize),
    #[error("cells of row {0} do not partition the alphabet")]
    NotAPartition(usize),
    #[error("language is not a singleton")]
    NotSingleton,
    #[error("invalid automaton file: {0}")]
    Format(String),
}

/// A complete deterministic automaton with states `0..states`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dfa {
    states: usize,
    alphabet: Vec<usize>,
    initial: usize,
    /// `delta[q][i]` is the successor of `q` on `alphabet[i]`.
    delta: Vec<Vec<usize>>,
    finals: Vec<bool>,
    /// Position of each base letter in `alphabet`.
    position: Vec<Option<usize>>,
}

fn positions(alphabet: &[usize]) -> Vec<Option<usize>> {
    let len = alphabet.iter().max().map_or(0, |m| m + 1);
    let mut pos = vec![None; len];
    for (i, &a) in alphabet.iter().enumerate() {
        pos[a] = Some(i);
    }
    pos
}

impl Dfa {
    /// Builds a DFA; the alphabet is sorted.
    pub fn new(
        states: usize,
        alphabet: Vec<usize>,
        initial: usize,
        delta: Vec<Vec<usize>>,
        finals: impl IntoIterator<Item = usize>,
    ) -> Result<Dfa, AutomatonError> {
        if states == 0 {
            return Err(AutomatonError::NoStates);
        }
        if initial >= states {
            return Err(AutomatonError::StateOutOfRange(initial));
        }
        let mut order: Vec<usize> = (0..alphabet.len()).collect();
        order.sort_by_key(|&i| alphabet[i]);
        let sorted: Vec<usize> = order.iter().map(|&i| alphabet[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(AutomatonError::DuplicateLetter);
        }
        if sorted.is_empty() && states > 1 {
            return Err(AutomatonError::EmptyAlphabet);
        }
        if delta.len() != states {
            return Err(AutomatonError::RowLength {
                state: delta.len(),
                expected: states,
                found: delta.len(),
            });
        }
        let mut table = Vec::with_capacity(states);
        for (q, row) in delta.iter().enumerate() {
            if row.len() != sorted.len() {
                return Err(AutomatonError::RowLength {
                    state: q,
                    expected: sorted.len(),
                    found: row.len(),
                });
            }
            if let Some(&bad) = row.iter().find(|&&r| r >= states) {
                return Err(AutomatonError::StateOutOfRange(bad));
            }
            table.push(order.iter().map(|&i| row[i]).collect());
        }
        let mut fin = vec![false; states];
        for f in finals {
            if f >= states {
                return Err(AutomatonError::StateOutOfRange(f));
            }
            fin[f] = true;
        }
        Ok(Dfa {
            states,
            position: positions(&sorted),
            alphabet: sorted,
            initial,
            delta: table,
            finals: fin,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn alphabet(&self) -> &[usize] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> BTreeSet<usize> {
        (0..self.states).filter(|&q| self.finals[q]).collect()
    }

    /// Transition rows indexed by alphabet position.
    pub fn table(&self) -> &[Vec<usize>] {
        &self.delta
    }

    /// `δ(q, letter)`, or `None` when the letter is outside the alphabet.
    pub fn step(&self, q: usize, letter: usize) -> Option<usize> {
        let i = (*self.position.get(letter)?)?;
        Some(self.delta[q][i])
    }

    /// `p.w`, or `None` when `w` leaves the alphabet.
    pub fn run_from(&self, p: usize, word: &[usize]) -> Option<usize> {
        word.iter().try_fold(p, |q, &a| self.step(q, a))
    }

    pub fn run(&self, word: &[usize]) -> Option<usize> {
        self.run_from(self.initial, word)
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        self.run(word).is_some_and(|q| self.finals[q])
    }

    fn successors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.delta[q].iter().copied()
    }

    fn closure_from(&self, start: impl IntoIterator<Item = usize>, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.states];
        let mut queue = VecDeque::new();
        for s in start {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(q) = queue.pop_front() {
            let next: Vec<usize> = if forward {
                self.successors(q).collect()
            } else {
                (0..self.states).filter(|&p| self.delta[p].contains(&q)).collect()
            };
            for r in next {
                if !seen[r] {
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
        seen
    }

    /// Whether some word leads from `p` to `q`.
    pub fn dkpath(&self, p: usize, q: usize) -> bool {
        self.closure_from([p], true)[q]
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        self.closure_from([self.initial], true)
    }

    /// States from which a final state is reachable.
    pub fn coaccessible(&self) -> BTreeSet<usize> {
        let co = self.coaccessible_mask();
        (0..self.states).filter(|&q| co[q]).collect()
    }

    fn coaccessible_mask(&self) -> Vec<bool> {
        self.closure_from((0..self.states).filter(|&q| self.finals[q]), false)
    }

    /// Whether `q` lies on a cycle of length at least 1.
    fn on_cycle(&self, q: usize) -> bool {
        self.closure_from(self.successors(q), true)[q]
    }

    /// Whether two distinct letters lead from `q` to coaccessible states.
    fn branches(&self, q: usize, co: &[bool]) -> bool {
        self.successors(q).filter(|&r| co[r]).count() >= 2
    }

    pub fn is_chain_language(&self) -> bool {
        let reach = self.reachable();
        let co = self.coaccessible_mask();
        !(0..self.states).any(|p| reach[p] && self.branches(p, &co))
    }

    pub fn is_multichain_language(&self) -> bool {
        let reach = self.reachable();
        let co = self.coaccessible_mask();
        let cyclic: Vec<usize> = (0..self.states).filter(|&r| reach[r] && self.on_cycle(r)).collect();
        let behind_cycle = self.closure_from(cyclic, true);
        !(0..self.states).any(|p| behind_cycle[p] && self.branches(p, &co))
    }

    fn useful(&self) -> Vec<bool> {
        let reach = self.reachable();
        let co = self.coaccessible_mask();
        (0..self.states).map(|q| reach[q] && co[q]).collect()
    }

    pub fn is_finite_language(&self) -> bool {
        let useful = self.useful();
        !(0..self.states).any(|q| useful[q] && self.on_cycle(q))
    }

    pub fn is_empty_language(&self) -> bool {
        !self.useful()[self.initial]
    }

    /// Accepted words, up to `limit` of them; `None` if the language is infinite.
    pub fn finite_words(&self, limit: usize) -> Option<Vec<Word>> {
        if !self.is_finite_language() {
            return None;
        }
        let useful = self.useful();
        let mut out = Vec::new();
        if !useful[self.initial] {
            return Some(out);
        }
        let mut stack = vec![(self.initial, Vec::new())];
        while let Some((q, w)) = stack.pop() {
            if out.len() >= limit {
                break;
            }
            if self.finals[q] {
                out.push(Word(w.clone()));
            }
            for (i, &r) in self.delta[q].iter().enumerate().rev() {
                if useful[r] {
                    let mut v = w.clone();
                    v.push(self.alphabet[i]);
                    stack.push((r, v));
                }
            }
        }
        out.sort();
        Some(out)
    }

    pub fn is_singleton(&self) -> bool {
        self.finite_words(2).is_some_and(|w| w.len() == 1)
    }

    pub fn word_of_singleton(&self) -> Result<Word, AutomatonError> {
        match self.finite_words(2) {
            Some(mut w) if w.len() == 1 => Ok(w.pop().unwrap()),
            _ => Err(AutomatonError::NotSingleton),
        }
    }

    /// The automaton for `u⁻¹L`: same tables, initial state `ι.u`.
    pub fn derivative(&self, u: &Word) -> Result<Dfa, AutomatonError> {
        let start = u
            .letters()
            .iter()
            .try_fold(self.initial, |q, &a| self.step(q, a).ok_or(AutomatonError::LetterOutsideAlphabet(a)))?;
        Ok(Dfa {
            initial: start,
            ..self.clone()
        })
    }

    /// Accepted words of length at most `max_len`, length-lexicographically.
    pub fn accepted_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut frontier = vec![(self.initial, Vec::new())];
        for len in 0..=max_len {
            for (q, w) in &frontier {
                if self.finals[*q] {
                    out.push(Word(w.clone()));
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * self.alphabet.len());
            for (q, w) in &frontier {
                for (i, &r) in self.delta[*q].iter().enumerate() {
                    let mut v = w.clone();
                    v.push(self.alphabet[i]);
                    next.push((r, v));
                }
            }
            frontier = next;
        }
        out
    }

    pub fn matrix(&self) -> TransitionMatrix {
        let mut cells = vec![vec![BTreeSet::new(); self.states]; self.states];
        for p in 0..self.states {
            for (i, &q) in self.delta[p].iter().enumerate() {
                cells[p][q].insert(self.alphabet[i]);
            }
        }
        TransitionMatrix {
            alphabet: self.alphabet.clone(),
            cells,
        }
    }

    pub fn from_json(text: &str) -> Result<Dfa, AutomatonError> {
        let file: DfaFile = serde_json::from_str(text).map_err(|e| AutomatonError::Format(e.to_string()))?;
        let n = file.states;
        let k = file.alphabet.len();
        if file.delta.len() > n {
            return Err(AutomatonError::RowLength {
                state: n,
                expected: n,
                found: file.delta.len(),
            });
        }
        // partial tables: missing rows, short rows and nulls go to a fresh sink
        let partial = file.delta.len() < n
            || file.delta.iter().any(|row| row.len() < k || row.iter().any(Option::is_none));
        let sink = n;
        let total = if partial { n + 1 } else { n };
        let mut delta = vec![vec![sink; k]; total];
        for (q, row) in file.delta.iter().enumerate() {
            if row.len() > k {
                return Err(AutomatonError::RowLength {
                    state: q,
                    expected: k,
                    found: row.len(),
                });
            }
            for (i, entry) in row.iter().enumerate() {
                if let Some(r) = entry {
                    if *r >= n {
                        return Err(AutomatonError::StateOutOfRange(*r));
                    }
                    delta[q][i] = *r;
                }
            }
        }
        Dfa::new(total, file.alphabet, file.initial, delta, file.final_states)
    }

    pub fn to_json(&self) -> String {
        let file = DfaFile {
            states: self.states,
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            delta: self.delta.iter().map(|row| row.iter().map(|&q| Some(q)).collect()).collect(),
            final_states: self.finals().into_iter().collect(),
        };
        serde_json::to_string(&file).expect("automaton serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfaFile {
    states: usize,
    alphabet: Vec<usize>,
    initial: usize,
    delta: Vec<Vec<Option<usize>>>,
    #[serde(rename = "final")]
    final_states: Vec<usize>,
}

/// The letter sets `T_{p,q} = {b ∈ B | δ(p,b) = q}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    pub alphabet: Vec<usize>,
    /// `cells[p][q]` is `T_{p,q}`.
    pub cells: Vec<Vec<BTreeSet<usize>>>,
}

impl TransitionMatrix {
    pub fn states(&self) -> usize {
        self.cells.len()
    }

    /// Rebuilds the automaton; each row must partition the alphabet.
    pub fn to_dfa(&self, initial: usize, finals: impl IntoIterator<Item = usize>) -> Result<Dfa, AutomatonError> {
        let n = self.cells.len();
        let mut alphabet = self.alphabet.clone();
        alphabet.sort_unstable();
        let mut delta = vec![vec![usize::MAX; alphabet.len()]; n];
        for p in 0..n {
            if self.cells[p].len() != n {
                return Err(AutomatonError::RowLength {
                    state: p,
                    expected: n,
                    found: self.cells[p].len(),
                });
            }
            for q in 0..n {
                for &b in &self.cells[p][q] {
                    let i = alphabet.binary_search(&b).map_err(|_| AutomatonError::LetterOutsideAlphabet(b))?;
                    if delta[p][i] != usize::MAX {
                        return Err(AutomatonError::NotAPartition(p));
                    }
                    delta[p][i] = q;
                }
            }
            if delta[p].contains(&usize::MAX) {
                return Err(AutomatonError::NotAPartition(p));
            }
        }
        Dfa::new(n, alphabet, initial, delta, finals)
    }
}

/// The complete DFA with `|w| + 2` states accepting exactly `{w}`.
pub fn singleton_dfa(w: &Word, alphabet: &[usize]) -> Result<Dfa, AutomatonError> {
    if alphabet.is_empty() {
        return Err(AutomatonError::EmptyAlphabet);
    }
    if let Some(&a) = w.letters().iter().find(|a| !alphabet.contains(a)) {
        return Err(AutomatonError::LetterOutsideAlphabet(a));
    }
    let n = w.len();
    let sink = n + 1;
    let delta = (0..=sink)
        .map(|q| {
            alphabet
                .iter()
                .map(|&b| if q < n && w.letters()[q] == b { q + 1 } else { sink })
                .collect()
        })
        .collect();
    Dfa::new(n + 2, alphabet.to_vec(), 0, delta, [n])
}

/// The trie automaton of a finite word set, completed with a sink.
pub fn finite_language_dfa(words: &[Word], alphabet: &[usize]) -> Result<Dfa, AutomatonError> {
    if let Some(&a) = words.iter().flat_map(|w| w.letters()).find(|a| !alphabet.contains(a)) {
        return Err(AutomatonError::LetterOutsideAlphabet(a));
    }
    let mut sorted = alphabet.to_vec();
    sorted.sort_unstable();
    // Node 0 is the sink, node 1 the root.
    let mut children: Vec<Vec<usize>> = vec![vec![0; sorted.len()], vec![0; sorted.len()]];
    let mut finals = BTreeSet::new();
    for w in words {
        let mut q = 1;
        for &a in w.letters() {
            let i = sorted.binary_search(&a).expect("letter checked");
            if children[q][i] == 0 {
                children.push(vec![0; sorted.len()]);
                children[q][i] = children.len() - 1;
            }
            q = children[q][i];
        }
        finals.insert(q);
    }
    if sorted.is_empty() {
        return Dfa::new(1, sorted, 0, vec![Vec::new()], finals.into_iter().map(|_| 0));
    }
    Dfa::new(children.len(), sorted, 1, children, finals)
}

/// Every complete DFA with initial state 0 and at most `max_states` states,
/// ordered by state count, then transition table, then final set.
pub fn enumerate_dfas(alphabet: &[usize], max_states: usize) -> impl Iterator<Item = Dfa> + '_ {
    (1..=max_states).flat_map(move |n| enumerate_dfas_exact(alphabet, n))
}

/// Every complete DFA with exactly `states` states and initial state 0.
///
/// Tables are enumerated lexicographically with the last cell varying
/// fastest; final sets as bit masks in increasing order.
pub fn enumerate_dfas_exact(alphabet: &[usize], states: usize) -> Box<dyn Iterator<Item = Dfa> + '_> {
    if states == 0 || (alphabet.is_empty() && states > 1) {
        return Box::new(std::iter::empty());
    }
    let mut sorted = alphabet.to_vec();
    sorted.sort_unstable();
    let cells = states * sorted.len();
    let tables = (states as u64).pow(cells as u32);
    let finals = 1u64 << states;
    let position = positions(&sorted);
    Box::new((0..tables).flat_map(move |t| {
        let mut digits = vec![0usize; cells];
        let mut x = t;
        for d in digits.iter_mut().rev() {
            *d = (x % states as u64) as usize;
            x /= states as u64;
        }
        let delta: Vec<Vec<usize>> = if sorted.is_empty() {
            vec![Vec::new(); states]
        } else {
            digits.chunks(sorted.len()).map(<[usize]>::to_vec).collect()
        };
        let alphabet = sorted.clone();
        let position = position.clone();
        (0..finals).map(move |f| Dfa {
            states,
            alphabet: alphabet.clone(),
            initial: 0,
            delta: delta.clone(),
            finals: (0..states).map(|q| f >> q & 1 == 1).collect(),
            position: position.clone(),
        })
    }))
}

/// All nonempty subsets of `letters` plus the empty one, smallest first.
pub fn sub_alphabets(letters: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..1u64 << letters.len())
        .map(|m| (0..letters.len()).filter(|&i| m >> i & 1 == 1).map(|i| letters[i]).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn loop_dfa(final_: bool) -> Dfa {
        Dfa::new(1, vec![0], 0, vec![vec![0]], if final_ { vec![0] } else { vec![] }).unwrap()
    }

    fn w(v: &[usize]) -> Word {
        Word(v.to_vec())
    }

    #[test]
    fn trie_accepts_exactly_its_words() {
        let words = vec![w(&[]), w(&[1, 0]), w(&[1, 0, 0]), w(&[0])];
        let d = finite_language_dfa(&words, &[0, 1]).unwrap();
        let mut expected = words.clone();
        expected.sort();
        assert_eq!(d.finite_words(10), Some(expected.clone()));
        assert_eq!(d.accepted_up_to(4).len(), 4);
        assert!(!d.is_chain_language());
        assert!(finite_language_dfa(&[w(&[2])], &[0, 1]).is_err());
        let empty = finite_language_dfa(&[w(&[])], &[]).unwrap();
        assert_eq!(empty.finite_words(3), Some(vec![w(&[])]));
    }

    #[test]
    fn one_state_matrix() {
        let m = loop_dfa(true).matrix();
        assert_eq!(m.cells[0][0], BTreeSet::from([0]));
    }

    #[test]
    fn non_partition_rejected() {
        let m = TransitionMatrix {
            alphabet: vec![0],
            cells: vec![vec![BTreeSet::from([0]), BTreeSet::from([0])], vec![BTreeSet::new(), BTreeSet::from([0])]],
        };
        assert_eq!(m.to_dfa(0, []), Err(AutomatonError::NotAPartition(0)));
        let gap = TransitionMatrix {
            alphabet: vec![0, 1],
            cells: vec![vec![BTreeSet::from([0])]],
        };
        assert_eq!(gap.to_dfa(0, []), Err(AutomatonError::NotAPartition(0)));
    }

    #[test]
    fn dkpath_line() {
        let line = Dfa::new(2, vec![0], 0, vec![vec![1], vec![1]], []).unwrap();
        assert!(line.dkpath(0, 1));
        assert!(!line.dkpath(1, 0));
        assert!(line.dkpath(1, 1));
        assert!(line.dkpath(0, 0));
    }

    #[test]
    fn coaccessible_examples() {
        let d = loop_dfa(false);
        assert!(d.coaccessible().is_empty());
        let d = Dfa::new(3, vec![0], 0, vec![vec![1], vec![2], vec![2]], [1]).unwrap();
        assert_eq!(d.coaccessible(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn classify_examples() {
        let single = singleton_dfa(&w(&[0, 1]), &[0, 1]).unwrap();
        assert!(single.is_chain_language());
        let a_star = loop_dfa(true);
        assert!(a_star.is_chain_language());
        assert!(!a_star.is_finite_language());
        // L = {0, 1}
        let two = Dfa::new(3, vec![0, 1], 0, vec![vec![1, 1], vec![2, 2], vec![2, 2]], [1]).unwrap();
        assert!(!two.is_chain_language());
        assert!(two.is_multichain_language());
        // 0* ∪ 1*
        let loops = Dfa::new(
            4,
            vec![0, 1],
            0,
            vec![vec![1, 2], vec![1, 3], vec![3, 2], vec![3, 3]],
            [0, 1, 2],
        )
        .unwrap();
        assert!(loops.is_multichain_language());
        assert!(!loops.is_chain_language());
        let all = Dfa::new(1, vec![0, 1], 0, vec![vec![0, 0]], [0]).unwrap();
        assert!(!all.is_multichain_language());
        // 0*1
        let a_star_b = Dfa::new(3, vec![0, 1], 0, vec![vec![0, 1], vec![2, 2], vec![2, 2]], [1]).unwrap();
        assert!(!a_star_b.is_multichain_language());
    }

    #[test]
    fn epsilon_language() {
        let eps = singleton_dfa(&Word::epsilon(), &[0]).unwrap();
        assert_eq!(eps.states(), 2);
        assert!(eps.is_finite_language());
        assert!(eps.is_singleton());
        assert_eq!(eps.word_of_singleton().unwrap(), Word::epsilon());
    }

    #[test]
    fn singleton_construction() {
        let d = singleton_dfa(&w(&[0, 1]), &[0, 1]).unwrap();
        assert_eq!(d.states(), 4);
        assert_eq!(d.accepted_up_to(4), vec![w(&[0, 1])]);
        assert_eq!(d.word_of_singleton().unwrap(), w(&[0, 1]));
        assert!(loop_dfa(true).word_of_singleton().is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = singleton_dfa(&w(&[0, 1, 1]), &[0, 1]).unwrap();
        assert_eq!(d.derivative(&Word::epsilon()).unwrap().accepted_up_to(4), d.accepted_up_to(4));
        let q = d.derivative(&w(&[0])).unwrap();
        assert_eq!(q.word_of_singleton().unwrap(), w(&[1, 1]));
        assert!(d.derivative(&w(&[2])).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_dfas(&[0], 1).count(), 2);
        assert_eq!(enumerate_dfas_exact(&[0], 2).count(), 16);
        assert_eq!(enumerate_dfas(&[0], 2).count(), 18);
        assert_eq!(enumerate_dfas(&[], 3).count(), 2);
        let all: Vec<Dfa> = enumerate_dfas(&[0, 1], 2).collect();
        // 2 final sets with one state, 16 tables times 4 final sets with two
        assert_eq!(all.len(), 2 + 16 * 4);
        let distinct: HashSet<&Dfa> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn json_round_trip_and_sink() {
        let d = singleton_dfa(&w(&[1]), &[0, 1]).unwrap();
        assert_eq!(Dfa::from_json(&d.to_json()).unwrap(), d);
        let partial = r#"{"states": 2, "alphabet": [0], "initial": 0, "delta": [[1]], "final": [1]}"#;
        let d = Dfa::from_json(partial).unwrap();
        assert_eq!(d.states(), 3);
        assert_eq!(d.accepted_up_to(3), vec![w(&[0])]);
        assert!(Dfa::from_json(r#"{"states": 1, "alphabet": [], "initial": 0, "delta": [[]], "final": [], "x": 1}"#).is_err());
    }

    #[test]
    fn sub_alphabet_order() {
        assert_eq!(sub_alphabets(&[0, 1]), vec![vec![], vec![0], vec![1], vec![0, 1]]);
    }

    fn arb_dfa() -> impl Strategy<Value = Dfa> {
        (1usize..=4, 1usize..=2).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(prop::collection::vec(0..n, k), n),
                prop::collection::vec(any::<bool>(), n),
                0..n,
            )
                .prop_map(move |(delta, fin, init)| {
                    let finals: Vec<usize> = (0..n).filter(|&q| fin[q]).collect();
                    Dfa::new(n, (0..k).collect(), init, delta, finals).unwrap()
                })
        })
    }

    fn short_words(k: usize, len: usize) -> Vec<Word> {
        crate::structures::words_up_to(k, len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn matrix_round_trip(d in arb_dfa()) {
            let back = d.matrix().to_dfa(d.initial(), d.finals()).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn coaccessible_matches_dkpath(d in arb_dfa()) {
            let co = d.coaccessible();
            for q in 0..d.states() {
                let fwd = d.finals().iter().any(|&f| d.dkpath(q, f));
                prop_assert_eq!(co.contains(&q), fwd);
            }
        }

        #[test]
        fn classifier_implications(d in arb_dfa()) {
            if d.is_singleton() {
                prop_assert!(d.is_chain_language());
            }
            if d.is_chain_language() {
                prop_assert!(d.is_multichain_language());
            }
            if d.is_finite_language() && d.is_chain_language() {
                let words = d.finite_words(usize::MAX).unwrap();
                if let Some(top) = words.iter().max_by_key(|w| w.len()) {
                    prop_assert!(words.iter().all(|u| crate::structures::prefix_leq(u, top)));
                }
            }
        }

        #[test]
        fn left_quotient(d in arb_dfa(), u in prop::collection::vec(0usize..2, 0..4)) {
            let k = d.alphabet().len();
            let u = Word(u.into_iter().filter(|&a| a < k).collect());
            let q = d.derivative(&u).unwrap();
            for x in short_words(k, 4) {
                prop_assert_eq!(q.accepts(x.letters()), d.accepts(u.concat(&x).letters()));
            }
        }

        #[test]
        fn equal_states_give_equal_cones(d in arb_dfa()) {
            let k = d.alphabet().len();
            let words = short_words(k, 3);
            for u in &words {
                for v in &words {
                    if d.run(u.letters()) == d.run(v.letters()) {
                        for x in short_words(k, 4) {
                            prop_assert_eq!(d.accepts(u.concat(&x).letters()), d.accepts(v.concat(&x).letters()));
                        }
                    }
                }
            }
        }
    }
}
