use std::path::PathBuf;
use std::process::Command;

use dblcat_cli::{run, EXIT_INPUT_ERROR, EXIT_LAW_FAILURE, EXIT_OK};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("dblcat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("dblcat").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn free_cat_on_a_chain() {
    let (code, out, _) = call(&["free-cat", &fixture("chain.graph")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("objects: a b c"));
    assert!(out.contains("morphisms: 6"));
    assert!(out.contains("  f ; g = f.g"));
    assert!(out.contains("  f.g : a -> c"));
    assert!(out.trim_end().ends_with("exact: true"));
}

#[test]
fn free_cat_on_a_loop_is_truncated() {
    let file = scratch("loop.graph", "graph\nnodes: x\nedge e x x\n");
    let (code, out, _) = call(&["free-cat", &file, "--max-length", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("morphisms: 4"));
    assert!(out.contains("exact: false"));
}

#[test]
fn free_monad_on_a_constant() {
    let (code, out, _) = call(&["free-monad", &fixture("const.poly")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("tree ops: 2"));
    assert!(out.contains("  c : -> y  (arity 0)"));
    assert!(out.contains("mu: _y <- [c] = c"));
    assert!(out.contains("exact: true"));
}

#[test]
fn free_monad_grafts_trees() {
    let file = scratch("nat.poly", "poly\nbase: y\nop z : -> y\nop s y : -> y\n");
    let (code, out, _) = call(&["free-monad", &file, "--max-depth", "2"]);
    assert_eq!(code, EXIT_OK);
    // depth 0, 1, 2: one hole, z, s(_), s(z), s(s(_))
    assert!(out.contains("tree ops: 5"));
    assert!(out.contains("mu: s(_y) <- [z] = s(z)"));
    assert!(out.contains("exact: false"));
}

#[test]
fn laws_report_machine_lines() {
    for instance in ["span", "poly"] {
        let (code, out, _) = call(&["laws", instance, "--size", "3", "--trials", "20", "--seed", "1"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.lines().any(|l| l.starts_with("SUITE double-axioms PASS ") && l.ends_with("seed=1")));
        assert!(out.lines().any(|l| l.starts_with("SUITE framed PASS ")));
    }
}

#[test]
fn laws_are_deterministic() {
    let args = ["laws", "span", "--trials", "10", "--seed", "7"];
    assert_eq!(call(&args), call(&args));
}

#[test]
fn check_universal_on_both_instances() {
    for file in ["chain.graph", "const.poly"] {
        let (code, out, _) = call(&["check-universal", &fixture(file), "--target-size", "2"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("SUITE universal-property PASS"));
        assert!(out.contains("SUITE theorem-pipeline PASS"));
    }
}

#[test]
fn check_universal_rejects_truncation() {
    let file = scratch("cycle.graph", "graph\nnodes: x\nedge e x x\n");
    let (code, out, _) = call(&["check-universal", &file]);
    assert_eq!(code, EXIT_LAW_FAILURE);
    assert!(out.contains("truncated"));
}

#[test]
fn compose_spans_and_polynomials() {
    let (code, out, _) = call(&["compose", &fixture("chain.graph"), &fixture("chain.graph")]);
    assert_eq!(code, EXIT_OK);
    // the only path of length two is f then g
    assert!(out.contains("{(f,g): a→c}"), "{out}");
    let s = scratch("succ.poly", "poly\nbase: y\nop s y : -> y\n");
    let (code, out, _) = call(&["compose", &s, &fixture("const.poly")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("(c,[]) : -> y"), "{out}");
}

#[test]
fn mixed_compose_is_an_input_error() {
    let (code, _, err) = call(&["compose", &fixture("chain.graph"), &fixture("const.poly")]);
    assert_eq!(code, EXIT_INPUT_ERROR);
    assert!(err.contains("graph with a polynomial"));
}

#[test]
fn parse_errors_carry_positions() {
    let file = scratch("bad.graph", "graph\nnodes: a b\n\nedge f a  zz\n");
    let (code, _, err) = call(&["free-cat", &file]);
    assert_eq!(code, EXIT_INPUT_ERROR);
    assert!(err.contains("line 4, column 11"), "{err}");
    let file = scratch("bad.poly", "poly\nbase: y\nop c : y\n");
    let (code, _, err) = call(&["free-monad", &file]);
    assert_eq!(code, EXIT_INPUT_ERROR);
    assert!(err.contains("line 3, column 1"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["laws", "rel"]).0, EXIT_INPUT_ERROR);
    assert_eq!(call(&["free-cat"]).0, EXIT_INPUT_ERROR);
    assert_eq!(call(&["free-cat", "/nonexistent/file.graph"]).0, EXIT_INPUT_ERROR);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dblcat");
    let ok = Command::new(bin).args(["free-cat", &fixture("chain.graph")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("morphisms: 6"));
    let bad = Command::new(bin).args(["free-monad", &fixture("chain.graph")]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT_ERROR));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
}
