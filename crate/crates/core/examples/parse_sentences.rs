// Parse a few sentences, print their canonical form and some syntactic facts.
//
// Run with `cargo run --example parse_sentences`.

use std::error::Error;

use iterlogic::formulas::parse_sentence;

const SENTENCES: &[&str] = &[
    "(fo (forall x (or (= x root) (hat R1 x) (hat R2 x))))",
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/left_spine.sexp")),
    "(w (exists-set X (exists x (and (in x X) (rel R1 x)))))",
];

fn run_example() -> Result<(), Box<dyn Error>> {
    for text in SENTENCES {
        let s = parse_sentence(text)?;
        let side = s.formula.side()?;
        println!("{s}");
        println!(
            "  side {side:?}, rank {}, set depth {}, {} nodes",
            s.formula.quantifier_rank(),
            s.formula.set_depth(),
            s.formula.node_count()
        );
        // printing is a fixed point of parsing
        assert_eq!(parse_sentence(&s.to_string())?, s);
    }

    let err = parse_sentence("(fo (exists-set X (in root X)))").unwrap_err();
    println!("rejected: {err}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
