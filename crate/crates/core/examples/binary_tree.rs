// The binary tree as the iteration of a two-element base: each corpus
// sentence is decided by translation and by the oracle.
//
// Run with `cargo run --example binary_tree`.

use std::error::Error;

use iterlogic::demos::demo_binary_tree;

fn run_example() -> Result<(), Box<dyn Error>> {
    let rows = demo_binary_tree()?;
    println!("{:<8} {:<8} {:<8} {:<9} sentence", "expect", "transl", "oracle", "replayed");
    for r in &rows {
        println!("{:<8} {:<8} {:<8} {:<9} {}", r.expected, r.translated, r.oracle, r.replayed, r.sentence);
    }
    assert!(rows.iter().all(|r| r.agrees()));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
