// Classify a handful of automata as chain, multichain, finite or
// singleton languages and print their transition matrices.
//
// Run with `cargo run --example automata_classes`.

use std::error::Error;

use iterlogic::automata::{finite_language_dfa, singleton_dfa, Dfa};
use iterlogic::structures::Word;

fn describe(name: &str, d: &Dfa) {
    println!(
        "{name:<12} states={} chain={} multichain={} finite={} singleton={}",
        d.states(),
        d.is_chain_language(),
        d.is_multichain_language(),
        d.is_finite_language(),
        d.is_singleton()
    );
    let m = d.matrix();
    for (p, row) in m.cells.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:?}")).collect();
        println!("{:<12} T_{p},* = {}", "", cells.join(" "));
    }
}

fn run_example() -> Result<(), Box<dyn Error>> {
    // 0* over {0, 1}: one infinite branch
    let zeros = Dfa::new(2, vec![0, 1], 0, vec![vec![0, 1], vec![1, 1]], [0])?;
    // (0|1)*: every word, so it branches everywhere
    let all = Dfa::new(1, vec![0, 1], 0, vec![vec![0, 0]], [0])?;
    // 0* ∪ 1*: two branches
    let two = Dfa::new(4, vec![0, 1], 0, vec![vec![1, 2], vec![1, 3], vec![3, 2], vec![3, 3]], [0, 1, 2])?;
    let even = Dfa::from_json(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/even_length.json")))?;
    let single = singleton_dfa(&Word(vec![1, 0]), &[0, 1])?;
    let finite = finite_language_dfa(&[Word::epsilon(), Word(vec![0]), Word(vec![1, 1])], &[0, 1])?;

    for (name, d) in [
        ("0*", &zeros),
        ("(0|1)*", &all),
        ("0*|1*", &two),
        ("even", &even),
        ("{10}", &single),
        ("{ε,0,11}", &finite),
    ] {
        describe(name, d);
    }

    assert!(zeros.is_chain_language() && !zeros.is_finite_language());
    assert!(two.is_multichain_language() && !two.is_chain_language());
    assert!(!all.is_multichain_language());
    assert_eq!(single.word_of_singleton()?, Word(vec![1, 0]));
    assert_eq!(finite.finite_words(10).map(|w| w.len()), Some(3));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
