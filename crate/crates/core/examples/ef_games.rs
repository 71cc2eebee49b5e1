// Rank-m equivalence by Ehrenfeucht-Fraïssé games, and the two
// compositionality checks: products and grafts.
//
// Run with `cargo run --release --example ef_games`.

use std::error::Error;

use iterlogic::ef::{check_broken_product_congruence, check_graft_congruence, check_product_congruence, demo_trees, ef_equiv};
use iterlogic::formulas::Regime;
use iterlogic::structures::FiniteStructure;

fn chain(n: usize) -> Result<FiniteStructure, Box<dyn Error>> {
    let pairs = (0..n).flat_map(|a| (a..n).map(move |b| (a, b)));
    Ok(FiniteStructure::new(n).with_order(pairs)?)
}

fn run_example() -> Result<(), Box<dyn Error>> {
    // linear orders of length 2^m - 1 and above are indistinguishable in rank m
    for (a, b, m) in [(2, 3, 2), (3, 4, 2), (7, 8, 3), (6, 7, 3)] {
        let v = ef_equiv(&chain(a)?, &chain(b)?, m, Regime::Fo)?;
        println!("chain {a} ≡_{m} chain {b}: {v}");
    }
    println!("chain 2 ≡_1 chain 3 with chain sets: {}", ef_equiv(&chain(2)?, &chain(3)?, 1, Regime::Chain)?);

    let r = check_product_congruence(60, 5, 1, 7)?;
    println!(
        "product congruence m=1: {} checked, {} non-isomorphic, {} violations",
        r.checked,
        r.non_isomorphic,
        r.violations.len()
    );
    assert!(r.violations.is_empty());
    let broken = check_broken_product_congruence(60, 5, 1, 7)?;
    // gluing at element 0 instead of the designated constant must be caught
    println!("broken product m=1:     {} violations", broken.violations.len());
    assert!(!broken.violations.is_empty());

    let g = check_graft_congruence(30, 6, 1, 7)?;
    println!("graft congruence k=1:   {} checked, {} violations", g.checked, g.violations.len());
    assert!(g.violations.is_empty());

    let t = demo_trees(2, 2, 1)?;
    println!("{}", serde_json::to_string_pretty(&t)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
