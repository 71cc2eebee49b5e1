// The Cayley graph of a free product of finite monoids, interpreted in
// the iteration of the disjoint union of their Cayley graphs.
//
// Run with `cargo run --example free_product`.

use std::error::Error;

use iterlogic::demos::{demo_free_product, nf_multiply, Monoid};

fn data(name: &str) -> String {
    let path = format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("example data")
}

fn run_example() -> Result<(), Box<dyn Error>> {
    let z2 = [Monoid::from_json(&data("z2.json"))?, Monoid::from_json(&data("z2b.json"))?];

    // a·b·a, then multiply by a on the right: the last letter cancels
    let aba = vec![(0, 1), (1, 1), (0, 1)];
    println!("aba · a = {:?}", nf_multiply(&z2, &aba, 0, 1));

    let r = demo_free_product(&z2, 5, 4)?;
    println!("Z/2 * Z/2: {}", serde_json::to_string(&r)?);
    assert!(r.ok());
    // the infinite dihedral group: one element of length 0, two of each other length
    assert_eq!(r.members_by_length, vec![1, 2, 2, 2, 2, 2]);

    let z3 = [Monoid::cyclic(3, "c")];
    let r = demo_free_product(&z3, 3, 2)?;
    println!("Z/3:       {}", serde_json::to_string(&r)?);
    assert!(r.ok());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
