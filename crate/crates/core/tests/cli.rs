//! The command-line front end: subcommands, file formats and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn iterlogic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iterlogic")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_prints_canonical_form() {
    let o = iterlogic(&["check", p(&data("left_spine.sexp"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("(ch (exists-set X"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.sexp");
    std::fs::write(&bad, "(fo (exists x (= x root))").unwrap();
    let o = iterlogic(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("end of input"));
    assert_eq!(code(&iterlogic(&["check", "/nonexistent.sexp"])), 2);
    assert_eq!(code(&iterlogic(&["frobnicate"])), 2);
}

#[test]
fn exact_bounds_are_refused() {
    let o = iterlogic(&["translate", "--structure", p(&data("tree_base.json")), "--formula", p(&data("left_spine.sexp"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("refusing to emit"));
}

#[test]
fn translate_then_evaluate_on_the_base() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.sexp");
    let o = iterlogic(&[
        "translate",
        "--structure",
        p(&data("tree_base.json")),
        "--formula",
        p(&data("left_spine.sexp")),
        "--override-bounds",
        p(&data("override.json")),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("unsound unless externally justified"));

    let o = iterlogic(&["eval-base", "--structure", p(&data("tree_base.json")), "--formula", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn eval_base_with_named_sets() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.sexp");
    let sets = dir.path().join("sets.json");
    std::fs::write(&f, "(fo (forall x (implies (in x S) (rel R1 x))))").unwrap();
    std::fs::write(&sets, r#"{"S": [0]}"#).unwrap();
    let base = data("tree_base.json");
    let with = ["eval-base", "--structure", p(&base), "--formula", f.to_str().unwrap(), "--sets", sets.to_str().unwrap()];
    assert_eq!(code(&iterlogic(&with)), 0);
    std::fs::write(&sets, r#"{"S": [0, 1]}"#).unwrap();
    assert_eq!(code(&iterlogic(&with)), 1);
}

#[test]
fn oracle_reports_witnesses() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.sexp");
    std::fs::write(&f, "(fo (exists x (and (in x E) (hat R2 x))))").unwrap();
    let binding = format!("E={}", p(&data("even_length.json")));
    let o = iterlogic(&[
        "oracle",
        "--structure",
        p(&data("tree_base.json")),
        "--formula",
        f.to_str().unwrap(),
        "--d",
        "3",
        "--automaton",
        &binding,
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], true);
    assert_eq!(v["witnesses"][0]["value"], "0.1");
}

#[test]
fn bounds_prints_json() {
    let o = iterlogic(&["bounds", "--l", "0", "--m", "1", "--states", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], "1");
    assert!(v.get("T").is_some() && v.get("multichain").is_some());
}

#[test]
fn ef_on_files_and_tree_demo() {
    let dir = TempDir::new().unwrap();
    let chain = |n: usize| {
        let tuples: Vec<[usize; 2]> = (0..n).flat_map(|a| (a..n).map(move |b| [a, b])).collect();
        let path = dir.path().join(format!("chain{n}.json"));
        let json = serde_json::json!({"universe": n, "relations": {"leq": {"arity": 2, "tuples": tuples}}});
        std::fs::write(&path, json.to_string()).unwrap();
        path
    };
    let (two, three, four) = (chain(2), chain(3), chain(4));
    assert_eq!(code(&iterlogic(&["ef", "--a", p(&two), "--b", p(&three), "--m", "2"])), 1);
    assert_eq!(code(&iterlogic(&["ef", "--a", p(&three), "--b", p(&four), "--m", "2"])), 0);
    assert_eq!(code(&iterlogic(&["ef", "--a", p(&three)])), 2);

    let o = iterlogic(&["ef", "demo-trees", "--depth", "2", "--width", "2", "--m", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"equivalent\": true"));
    assert_eq!(code(&iterlogic(&["ef", "demo-trees", "--depth", "2", "--width", "2", "--m", "2"])), 3);
}

#[test]
fn demos() {
    let o = iterlogic(&["demo-tree"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("all agree"));

    let o = iterlogic(&["demo-free-product", p(&data("z2.json")), p(&data("z2b.json")), "--member-len", "3", "--edge-len", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["members_by_length"], serde_json::json!([1, 2, 2, 2]));
}

#[test]
fn free_set_through_a_context() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.sexp");
    let out = dir.path().join("out.sexp");
    // a right child at even depth, such as 01
    std::fs::write(&f, "(fo (exists x (and (in x E) (hat R2 x))))").unwrap();
    let o = iterlogic(&[
        "translate",
        "--structure",
        p(&data("tree_base.json")),
        "--formula",
        f.to_str().unwrap(),
        "--ctx",
        p(&data("even_ctx.json")),
        "--override-bounds",
        p(&data("override.json")),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let base = data("tree_base.json");
    let eval = |sets: &Path| {
        code(&iterlogic(&["eval-base", "--structure", p(&base), "--formula", out.to_str().unwrap(), "--sets", p(sets)]))
    };
    assert_eq!(eval(&data("even_cells.json")), 0);
    // the same context with a matrix accepting only ε
    let root_only = dir.path().join("root_only.json");
    std::fs::write(&root_only, r#"{"T1_0_0": [], "T1_0_1": [0, 1], "T1_1_0": [], "T1_1_1": [0, 1]}"#).unwrap();
    assert_eq!(eval(&root_only), 1);
    // without the cells the sentence has free set variables
    assert_eq!(code(&iterlogic(&["eval-base", "--structure", p(&base), "--formula", out.to_str().unwrap()])), 2);
}
