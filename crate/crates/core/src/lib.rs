//! Monadic second-order logic over tree-like iterations of finite structures.
//!
//! The iteration `A*` of a base `A` is the tree of finite words over its
//! universe, ordered by prefix, with each relation of `A` lifted to siblings.
//! [`translator`] compiles chain, multichain and weak sentences about `A*`
//! into weak-MSO sentences about `A`, which [`evaluator`] decides on a finite
//! base. [`oracle`] evaluates the same sentences directly on `A*` under
//! length and state bounds, and [`ef`] checks rank-`m` equivalence with
//! Ehrenfeucht-Fraïssé games.

pub mod formulas;
pub mod structures;
pub mod automata;
pub mod bounds;
pub mod evaluator;
pub mod translator;
pub mod oracle;
pub mod ef;
pub mod demos;
