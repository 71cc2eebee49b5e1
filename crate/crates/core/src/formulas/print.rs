use std::fmt;

use super::{Formula, Sentence, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "(const {c})"),
            Term::Root => f.write_str("root"),
        }
    }
}

fn terms(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for t in ts {
        write!(f, " {t}")?;
    }
    Ok(())
}

/// Canonical single-line form. Only core connectives are printed, so
/// `parse_formula` of the output rebuilds the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::PrefLeq(a, b) => write!(f, "(leq {a} {b})"),
            Formula::Rel(r, ts) => {
                write!(f, "(rel {r}")?;
                terms(f, ts)?;
                f.write_str(")")
            }
            Formula::HatRel(r, ts) => {
                write!(f, "(hat {r}")?;
                terms(f, ts)?;
                f.write_str(")")
            }
            Formula::Mem(t, s) => write!(f, "(in {t} {s})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::ExistsInd(v, g) => write!(f, "(exists {v} {g})"),
            Formula::ExistsSet(v, g) => write!(f, "(exists-set {v} {g})"),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.regime, self.formula)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, parse_sentence, Regime};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prints_canonical_form() {
        let text = "(mch (exists-set X (exists x (and (in x X) (not (hat R x root))))))";
        let s = parse_sentence(text).unwrap();
        assert_eq!(s.to_string(), text);
        assert_eq!(s.regime, Regime::Multichain);
    }

    const INDS: &[&str] = &["x", "y", "z"];
    const SETS: &[&str] = &["X", "Y"];

    fn term() -> impl Strategy<Value = Term> {
        prop_oneof![
            prop::sample::select(INDS).prop_map(Term::var),
            prop::sample::select(&["c", "d"][..]).prop_map(|c| Term::Const(c.into())),
            Just(Term::Root),
        ]
    }

    fn formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (term(), term()).prop_map(|(a, b)| Formula::Eq(a, b)),
            (term(), term()).prop_map(|(a, b)| Formula::PrefLeq(a, b)),
            (prop::sample::select(&["R", "E"][..]), prop::collection::vec(term(), 1..4))
                .prop_map(|(r, ts)| Formula::Rel(r.into(), ts)),
            (prop::sample::select(&["R", "E"][..]), prop::collection::vec(term(), 1..4))
                .prop_map(|(r, ts)| Formula::HatRel(r.into(), ts)),
            (term(), prop::sample::select(SETS)).prop_map(|(t, s)| Formula::mem(t, s)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (prop::sample::select(INDS), inner.clone()).prop_map(|(v, g)| Formula::exists(v, g)),
                (prop::sample::select(SETS), inner).prop_map(|(v, g)| Formula::exists_set(v, g)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn parse_print_round_trip(f in formula()) {
            let printed = f.to_string();
            let back = parse_formula(&printed).unwrap();
            if f.has_shadowing() {
                // renaming changes names but never the shape
                prop_assert_eq!(back.node_count(), f.node_count());
                prop_assert!(!back.has_shadowing());
            } else {
                prop_assert_eq!(&back, &f);
                prop_assert_eq!(back.to_string(), printed);
            }
        }
    }
}
