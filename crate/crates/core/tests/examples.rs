//! Every example runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                run_example().unwrap();
            }
        }
    };
}

example!(parse_sentences);
example!(automata_classes);
example!(hintikka_bounds);
example!(translate_and_eval);
example!(bounded_oracle);
example!(ef_games);
example!(binary_tree);
example!(free_product);
