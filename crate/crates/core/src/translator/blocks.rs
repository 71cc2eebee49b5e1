//! First-order formulas over a transition matrix.
//!
//! Each formula talks about an automaton with states `0..states` whose
//! matrix cells `T_{p,q}` are free set variables of the base. States are
//! never quantified: every statement about them unfolds into a finite
//! disjunction, and only letters (`u1`, `u2`) are bound.

use crate::formulas::{Formula, Term};

/// Naming scheme for the cells of one matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cells {
    prefix: String,
}

impl Cells {
    pub fn new(prefix: impl Into<String>) -> Cells {
        Cells { prefix: prefix.into() }
    }

    /// The name of `T_{p,q}`.
    pub fn cell(&self, p: usize, q: usize) -> String {
        format!("{}_{}_{}", self.prefix, p, q)
    }

    pub fn all(&self, states: usize) -> Vec<String> {
        (0..states).flat_map(|p| (0..states).map(move |q| self.cell(p, q))).collect()
    }
}

impl Default for Cells {
    fn default() -> Self {
        Cells::new("T")
    }
}

fn letter(name: &str) -> Term {
    Term::var(name)
}

fn in_cell(cells: &Cells, var: &str, p: usize, q: usize) -> Formula {
    Formula::mem(letter(var), cells.cell(p, q))
}

/// Some letter moves `p` to `q`.
fn edge(cells: &Cells, p: usize, q: usize) -> Formula {
    Formula::exists("u1", in_cell(cells, "u1", p, q))
}

/// Some word leads from `p` to `q`: a disjunction over simple paths.
pub fn formula_dkpath(cells: &Cells, states: usize, p: usize, q: usize) -> Formula {
    if p == q {
        return Formula::True;
    }
    let mut paths = Vec::new();
    let mut path = vec![p];
    simple_paths(cells, states, q, &mut path, &mut paths);
    Formula::disj(paths)
}

fn simple_paths(cells: &Cells, states: usize, target: usize, path: &mut Vec<usize>, out: &mut Vec<Formula>) {
    for next in 0..states {
        if path.contains(&next) {
            continue;
        }
        path.push(next);
        if next == target {
            out.push(Formula::conj(path.windows(2).map(|w| edge(cells, w[0], w[1])).collect()));
        } else {
            simple_paths(cells, states, target, path, out);
        }
        path.pop();
    }
}

fn reachable(cells: &Cells, states: usize, initial: usize, q: usize) -> Formula {
    formula_dkpath(cells, states, initial, q)
}

fn coaccessible(cells: &Cells, states: usize, finals: &[usize], q: usize) -> Formula {
    Formula::disj(finals.iter().map(|&f| formula_dkpath(cells, states, q, f)).collect())
}

/// `q` lies on a cycle of positive length.
fn on_cycle(cells: &Cells, states: usize, q: usize) -> Formula {
    Formula::disj(
        (0..states)
            .map(|s| Formula::and_folded(edge(cells, q, s), formula_dkpath(cells, states, s, q)))
            .collect(),
    )
}

/// Two distinct letters lead from `p` to coaccessible states.
fn branches(cells: &Cells, states: usize, finals: &[usize], p: usize) -> Formula {
    let mut cases = Vec::new();
    for q in 0..states {
        for r in q..states {
            let letters = Formula::exists(
                "u1",
                Formula::exists(
                    "u2",
                    Formula::conj(vec![
                        Formula::not(Formula::eq(letter("u1"), letter("u2"))),
                        in_cell(cells, "u1", p, q),
                        in_cell(cells, "u2", p, r),
                    ]),
                ),
            );
            cases.push(Formula::conj(vec![
                letters,
                coaccessible(cells, states, finals, q),
                coaccessible(cells, states, finals, r),
            ]));
        }
    }
    Formula::disj(cases)
}

/// The language is a chain: no reachable state branches.
pub fn formula_chain(cells: &Cells, states: usize, initial: usize, finals: &[usize]) -> Formula {
    Formula::negate(Formula::disj(
        (0..states)
            .map(|p| {
                Formula::and_folded(
                    reachable(cells, states, initial, p),
                    branches(cells, states, finals, p),
                )
            })
            .collect(),
    ))
}

/// The language is a multichain: no branching state lies behind a
/// reachable cycle.
pub fn formula_mchain(cells: &Cells, states: usize, initial: usize, finals: &[usize]) -> Formula {
    let behind_cycle = |p: usize| {
        Formula::disj(
            (0..states)
                .map(|r| {
                    Formula::conj(vec![
                        reachable(cells, states, initial, r),
                        on_cycle(cells, states, r),
                        formula_dkpath(cells, states, r, p),
                    ])
                })
                .collect(),
        )
    };
    Formula::negate(Formula::disj(
        (0..states)
            .map(|p| Formula::and_folded(behind_cycle(p), branches(cells, states, finals, p)))
            .collect(),
    ))
}

/// The language is finite: no reachable, coaccessible state is on a cycle.
pub fn formula_finite(cells: &Cells, states: usize, initial: usize, finals: &[usize]) -> Formula {
    Formula::negate(Formula::disj(
        (0..states)
            .map(|q| {
                Formula::conj(vec![
                    reachable(cells, states, initial, q),
                    coaccessible(cells, states, finals, q),
                    on_cycle(cells, states, q),
                ])
            })
            .collect(),
    ))
}

/// The language has exactly one word.
pub fn formula_singleton(cells: &Cells, states: usize, initial: usize, finals: &[usize]) -> Formula {
    let extends = Formula::disj(
        finals
            .iter()
            .map(|&f| {
                let onward = Formula::disj(
                    (0..states)
                        .map(|s| Formula::and_folded(edge(cells, f, s), coaccessible(cells, states, finals, s)))
                        .collect(),
                );
                Formula::and_folded(reachable(cells, states, initial, f), onward)
            })
            .collect(),
    );
    Formula::conj(vec![
        formula_finite(cells, states, initial, finals),
        formula_chain(cells, states, initial, finals),
        Formula::negate(extends),
        coaccessible(cells, states, finals, initial),
    ])
}

/// Each row of the matrix partitions `alphabet`.
pub fn formula_row_partition(cells: &Cells, states: usize, p: usize, alphabet: &str) -> Formula {
    let a = || letter("u1");
    let mut parts = Vec::new();
    for q in 0..states {
        parts.push(Formula::implies(in_cell(cells, "u1", p, q), Formula::mem(a(), alphabet)));
    }
    parts.push(Formula::implies(
        Formula::mem(a(), alphabet),
        Formula::disj((0..states).map(|q| in_cell(cells, "u1", p, q)).collect()),
    ));
    for q in 0..states {
        for r in q + 1..states {
            parts.push(Formula::not(Formula::and(in_cell(cells, "u1", p, q), in_cell(cells, "u1", p, r))));
        }
    }
    Formula::forall("u1", Formula::conj(parts))
}

/// Rows are pairwise disjoint cells with a common union.
pub fn formula_matrix_wellformed(cells: &Cells, states: usize) -> Formula {
    let row_union = |p: usize| Formula::disj((0..states).map(|q| in_cell(cells, "u1", p, q)).collect());
    let mut parts = Vec::new();
    for p in 0..states {
        for q in 0..states {
            for r in q + 1..states {
                parts.push(Formula::not(Formula::and(in_cell(cells, "u1", p, q), in_cell(cells, "u1", p, r))));
            }
        }
        if p > 0 {
            parts.push(Formula::implies(row_union(p), row_union(0)));
            parts.push(Formula::implies(row_union(0), row_union(p)));
        }
    }
    Formula::forall("u1", Formula::conj(parts))
}

/// The run on `letters` from `from` ends in a final state.
pub fn formula_run(cells: &Cells, states: usize, from: usize, finals: &[usize], letters: &[String]) -> Formula {
    match letters.split_first() {
        None => {
            if finals.contains(&from) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Some((first, rest)) => Formula::disj(
            (0..states)
                .map(|q| {
                    let tail = formula_run(cells, states, q, finals, rest);
                    if tail == Formula::False {
                        return Formula::False;
                    }
                    Formula::and_folded(in_cell(cells, first, from, q), tail)
                })
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{singleton_dfa, Dfa};
    use crate::evaluator::{eval, expand_with_sets};
    use crate::formulas::Regime;
    use crate::structures::{FiniteStructure, Word};
    use std::collections::BTreeMap;

    fn expansion(dfa: &Dfa, size: usize) -> FiniteStructure {
        let cells = Cells::default();
        let m = dfa.matrix();
        let mut named = BTreeMap::new();
        for p in 0..dfa.states() {
            for q in 0..dfa.states() {
                named.insert(cells.cell(p, q), m.cells[p][q].clone());
            }
        }
        expand_with_sets(&FiniteStructure::new(size), &named).unwrap()
    }

    #[test]
    fn trivial_paths() {
        assert_eq!(formula_dkpath(&Cells::default(), 1, 0, 0), Formula::True);
        let two = formula_dkpath(&Cells::default(), 2, 0, 1);
        assert_eq!(two, Formula::exists("u1", Formula::mem(Term::var("u1"), "T_0_1")));
    }

    #[test]
    fn singleton_formula_on_constructed_singleton() {
        let d = singleton_dfa(&Word(vec![0, 1]), &[0, 1]).unwrap();
        let s = expansion(&d, 2);
        let finals: Vec<usize> = d.finals().into_iter().collect();
        let g = formula_singleton(&Cells::default(), d.states(), d.initial(), &finals);
        assert_eq!(eval(&s, &g, Regime::Fo), Ok(true));
    }

    #[test]
    fn finite_formula_on_loop() {
        let d = Dfa::new(1, vec![0], 0, vec![vec![0]], [0]).unwrap();
        let g = formula_finite(&Cells::default(), 1, 0, &[0]);
        assert_eq!(eval(&expansion(&d, 1), &g, Regime::Fo), Ok(false));
    }

    #[test]
    fn run_formula_unfolds_states() {
        let d = singleton_dfa(&Word(vec![1]), &[0, 1]).unwrap();
        let s = expansion(&d, 2);
        let finals: Vec<usize> = d.finals().into_iter().collect();
        for a in 0..2 {
            let g = Formula::exists(
                "x",
                Formula::and(
                    Formula::Eq(Term::var("x"), Term::Const("c".into())),
                    formula_run(&Cells::default(), d.states(), 0, &finals, &["x".to_string()]),
                ),
            );
            let s = s.clone().with_constant("c", a).unwrap();
            assert_eq!(eval(&s, &g, Regime::Fo), Ok(a == 1));
        }
        assert_eq!(formula_run(&Cells::default(), 3, 0, &[1], &[]), Formula::False);
    }

    #[test]
    fn matrices_are_wellformed() {
        let d = singleton_dfa(&Word(vec![0]), &[0, 2]).unwrap();
        let g = formula_matrix_wellformed(&Cells::default(), d.states());
        assert_eq!(eval(&expansion(&d, 3), &g, Regime::Fo), Ok(true));
        let broken = expansion(&d, 3).with_predicate("T_1_1", [1]).unwrap();
        assert_eq!(eval(&broken, &g, Regime::Fo), Ok(false));
    }
}
