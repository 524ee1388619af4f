mod common;

use std::io::Cursor;
use std::process::Command;

use common::*;
use probtree::cli::{run, ReplState};
use probtree::{parse_step, save_json};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn probtree(args: &[&str], stdin: &str) -> Output {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("probtree").chain(args.iter().copied());
    let code = run(argv, &mut input, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(name: &str) -> String {
    fixtures_dir().join(format!("{name}.json")).display().to_string()
}

#[test]
fn query_prints_rational_then_decimal() {
    let out = probtree(&["query", &path("t1"), "P(X=0 | do(Y=1))"], "");
    assert_eq!((out.code, out.stdout.as_str()), (0, "1/2 (0.500000)\n"));
    let out = probtree(&["query", &path("fig1d"), "P(X=0 | do(Y=1); Z=0)"], "");
    assert_eq!(out.stdout, "5/8 (0.625000)\n");
    let out = probtree(&["query", &path("fig1d"), "P(X=0 | see(Z=0); do(Y=1))"], "");
    assert_eq!(out.stdout, "3/5 (0.600000)\n");
    let out = probtree(&["query", &path("t1"), "P(X=0 | Y=1)"], "");
    assert_eq!(out.stdout, "9/13 (0.692308)\n");
}

#[test]
fn query_json() {
    let out = probtree(&["query", &path("t1"), "P(X=0 | do(Y=1))", "--json"], "");
    assert_eq!(out.code, 0);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["prob"], "1/2");
    assert_eq!(v["decimal"].as_f64(), Some(0.5));
}

#[test]
fn mincut_with_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("cut.dot");
    let out = probtree(&["mincut", &path("t1"), "Y=1", "--dot", dot.to_str().unwrap()], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "true: [4, 6]  false: [3, 5]  critical: [1, 2]\n");
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/t1_y1.dot")).unwrap();
    assert_eq!(std::fs::read_to_string(dot).unwrap(), golden);
}

#[test]
fn validate_reports_and_exit_codes() {
    let out = probtree(&["validate", &path("t1")], "");
    assert_eq!((out.code, out.stdout.as_str()), (0, "ok\n"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(path("t1"))
        .unwrap()
        .replacen("\"3/4\"", "\"5/8\"", 1);
    std::fs::write(&bad, text).unwrap();
    let out = probtree(&["validate", bad.to_str().unwrap()], "");
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("7/8"), "{}", out.stderr);

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(probtree(&["validate", broken.to_str().unwrap()], "").code, 2);
    assert_eq!(probtree(&["validate", "/nonexistent/tree.json"], "").code, 2);
}

#[test]
fn error_classes() {
    let out = probtree(&["query", &path("t1"), "P(X=0 | do(Y=)"], "");
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("syntax error at position"), "{}", out.stderr);

    let out = probtree(&["query", &path("t1"), "P(W=0)"], "");
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("cannot be resolved"), "{}", out.stderr);

    let out = probtree(&["query", &path("t1"), "P(X=0 | X=0 & X=1)"], "");
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("logically false"), "{}", out.stderr);

    assert_eq!(probtree(&[], "").code, 1);
    assert_eq!(probtree(&["frobnicate"], "").code, 1);
    assert_eq!(probtree(&["mass", &path("t1"), "--width", "x"], "").code, 1);
    let help = probtree(&["--help"], "");
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("transform"));
}

#[test]
fn transform_then_query_equals_query() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let out = probtree(
        &[
            "transform",
            &path("fig1d"),
            "--op",
            "do(Y=1)",
            "--op",
            "Z=0",
            "-o",
            out_path.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let after = probtree(&["query", out_path.to_str().unwrap(), "P(X=0)"], "");
    let direct = probtree(&["query", &path("fig1d"), "P(X=0 | do(Y=1); Z=0)"], "");
    assert_eq!(after.stdout, direct.stdout);

    let out = probtree(
        &[
            "transform",
            &path("t1"),
            "--op",
            "cf(Y=1)",
            "-o",
            out_path.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let cf = probtree::load_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(cf.variables().contains("Y*"));
}

#[test]
fn mass_diagram() {
    let out = probtree(&["mass", &path("t1"), "--width", "24"], "");
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().count(), 24);
    assert!(out.stdout.starts_with("+ O=1 1/1"));
    let out = probtree(&["mass", &path("t2"), "--width", "10"], "");
    assert!(out.stdout.contains("x X=0 0/1"));
}

#[test]
fn repl_session() {
    let script = "p X=0\nsee Y=1\np X=0\nundo\np X=0\ndo Y=1\nshow\nbogus\ncf\nreset\np X=0\nquit\np X=1\n";
    let out = probtree(&["repl", &path("t1")], script);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.matches(" (0.").count(), 4, "{}", out.stdout);
    let text = out.stdout;
    let first = text.find("1/2 (0.500000)").unwrap();
    let conditioned = text.find("9/13 (0.692308)").unwrap();
    assert!(first < conditioned);
    assert!(text.contains("0 -> 1: 1/2 => 9/13"));
    assert!(text.contains("0 -> 1: 9/13 => 1/2"), "undo prints the reverted edges");
    assert!(text.contains("# do(Y=1)"));
    assert!(text.contains("unknown command \"bogus\""));
    assert!(text.contains("error: syntax error"));
    assert!(!text.contains("1/2 (0.500000)\n> 1/2"), "quit stops reading");
}

#[test]
fn repl_undo_restores_exactly() {
    let tree = fixture("fig1d");
    let mut state = ReplState::new(tree.clone());
    for (i, step) in ["do(Y=1)", "Z=0", "cf(X=1)", "see(Y*=1 | X*=0)"].iter().enumerate() {
        let before = state.current.clone();
        state.push(parse_step(step).unwrap()).unwrap();
        let after = state.current.clone();
        assert!(state.undo().unwrap());
        assert_eq!(state.current, before, "step {i}");
        state.push(parse_step(step).unwrap()).unwrap();
        assert_eq!(state.current, after);
    }
    state.reset();
    assert_eq!(state.current, tree);
    assert!(!state.undo().unwrap());
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_probtree"))
        .args(["query", &path("fig1d"), "P(X=0 | do(Y=1); Z=0)"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "5/8 (0.625000)\n");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("noroot.json");
    let text = save_json(&fixture("t1")).replacen("\"var\": \"O\"", "\"var\": \"R\"", 1);
    std::fs::write(&file, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_probtree"))
        .args(["validate", file.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not bind O=1"));

    let out = Command::new(env!("CARGO_BIN_EXE_probtree"))
        .arg("mincut")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
