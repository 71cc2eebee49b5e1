// Bounded evaluation on the iteration itself, with Skolem witnesses and
// an independent replay of each true verdict.
//
// Run with `cargo run --example bounded_oracle`.

use std::error::Error;

use iterlogic::automata::Dfa;
use iterlogic::demos::binary_tree_base;
use iterlogic::formulas::parse_sentence;
use iterlogic::oracle::{oracle_eval, oracle_eval_with, replay, OracleConfig};

fn run_example() -> Result<(), Box<dyn Error>> {
    let base = binary_tree_base();

    let cases = [
        // a right child below a left child
        "(fo (exists x (and (hat R2 x) (exists y (and (leq y x) (and (not (= y x)) (hat R1 y)))))))",
        // every node has a left child; true, but the children of depth-3
        // nodes lie past d = 3, so this comes back false with bound_hit
        "(fo (forall x (exists y (and (leq x y) (and (not (= x y)) (and (hat R1 y) (forall z (implies (leq z y) (or (leq z x) (= z y))))))))))",
        // no node is both a left and a right child
        "(fo (exists x (and (hat R1 x) (hat R2 x))))",
        // a two-element chain
        "(ch (exists-set X (exists x (exists y (and (in x X) (and (in y X) (not (= x y))))))))",
    ];
    for text in cases {
        let s = parse_sentence(text)?;
        let cfg = OracleConfig::new(s.regime, 3, 2, 1);
        let out = oracle_eval(&base, &s.formula, &cfg)?;
        let replayed = out.verdict && replay(&base, &s.formula, &cfg, &out);
        println!(
            "{:<5} bound_hit={:<5} witnesses={:<3} replayed={replayed}  {text}",
            out.verdict,
            out.bound_hit,
            out.witnesses.len()
        );
        if out.verdict {
            assert!(replayed);
        }
    }

    // a free set variable given by an automaton: words of even length
    let even = Dfa::from_json(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/even_length.json")))?;
    let s = parse_sentence("(fo (forall x (implies (in x E) (forall y (implies (and (leq x y) (and (not (= x y)) (forall z (implies (leq z y) (or (leq z x) (= z y)))))) (not (in y E)))))))")?;
    let out = oracle_eval_with(&base, &s.formula, &OracleConfig::new(s.regime, 4, 2, 1), &[("E", &even)])?;
    println!("children of even-length words have odd length: {}", out.verdict);
    println!("first witness: {}", out.to_json()["witnesses"][0]);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
