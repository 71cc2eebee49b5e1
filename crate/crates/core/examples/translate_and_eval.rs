// Compile an iteration sentence to a weak-MSO sentence of the base and
// evaluate both sides: the compiled sentence on the finite base, the
// original with the bounded oracle.
//
// Run with `cargo run --example translate_and_eval`.

use std::error::Error;

use iterlogic::evaluator::eval;
use iterlogic::formulas::{parse_sentence, Regime};
use iterlogic::oracle::{oracle_eval, OracleConfig};
use iterlogic::structures::FiniteStructure;
use iterlogic::translator::{translate, AutomatonContext, BoundPolicy, OverrideBounds, TranslateError};

fn data(name: &str) -> String {
    let path = format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("example data")
}

fn run_example() -> Result<(), Box<dyn Error>> {
    let base = FiniteStructure::base_from_json(&data("tree_base.json"))?;
    let sentence = parse_sentence(&data("left_spine.sexp"))?;

    // the exact bounds are far beyond anything that can be written down
    match translate(&sentence, &AutomatonContext::new(), &BoundPolicy::paper(), base.signature()) {
        Err(TranslateError::TooLarge { reason, .. }) => println!("exact bounds refused: {reason}"),
        other => println!("exact bounds: {:?}", other.map(|t| t.metadata.node_count)),
    }

    let bounds = OverrideBounds::from_json(&data("override.json"))?;
    let t = translate(&sentence, &AutomatonContext::new(), &BoundPolicy::Override(bounds), base.signature())?;
    println!(
        "compiled under override: {} nodes, {} quantifiers, sound={}",
        t.metadata.node_count, t.metadata.quantifier_count, t.metadata.sound
    );
    let rendered = t.render();
    for line in rendered.lines().take_while(|l| l.starts_with(';')) {
        println!("  {line}");
    }

    let compiled = eval(&base, &t.formula, Regime::Weak)?;
    let out = oracle_eval(&base, &sentence.formula, &OracleConfig::new(sentence.regime, 3, 2, 1))?;
    println!("base evaluation: {compiled}");
    println!("oracle:          {} (bound hit: {})", out.verdict, out.bound_hit);
    assert!(compiled && out.verdict);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
