// Print the rank-type bound and the automaton size bounds used when
// translating one set quantifier.
//
// Run with `cargo run --example hintikka_bounds`.

use std::error::Error;

use iterlogic::bounds::{bound_set, hintikka_bound};
use iterlogic::structures::Signature;

fn run_example() -> Result<(), Box<dyn Error>> {
    let empty = Signature::base(Vec::<(String, usize)>::new())?;
    let unary = Signature::base([("R1", 1), ("R2", 1)])?;

    println!("{:<3} {:<3} {:>14} {:>14}", "l", "m", "T (empty)", "T (R1,R2)");
    for l in 0..=2 {
        for m in 0..=1 {
            let show = |b: iterlogic::bounds::BigBound| match b.to_u64() {
                Some(v) => v.to_string(),
                None => format!("~2^{:.1}", b.log2_f64()),
            };
            println!(
                "{l:<3} {m:<3} {:>14} {:>14}",
                show(hintikka_bound(&empty, l, m)),
                show(hintikka_bound(&unary, l, m))
            );
        }
    }

    // one context automaton with 2 states, rank 0 below the quantifier
    let b = bound_set(&unary, &[2], 0, 0);
    println!("{}", serde_json::to_string_pretty(&b)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
