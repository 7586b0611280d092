use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_softquota"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/examples")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_running_example() {
    let example = fixture("paper_example.json");
    let out = run(&["solve", example.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["members"], serde_json::json!(["c3", "c4"]));
    assert!(doc.get("trace").is_none());
}

#[test]
fn solve_trace_matches_golden_file() {
    let example = fixture("paper_example.json");
    let out = run(&["solve", "--trace", example.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read(fixture("paper_example.out.json")).unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(golden).unwrap()
    );
}

#[test]
fn solve_reads_stdin_and_writes_file() {
    let text = std::fs::read(fixture("paper_example.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("result.json");
    let out = run_with_stdin(&["solve", "-", "-o", dest.to_str().unwrap()], &text);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(doc["members"], serde_json::json!(["c3", "c4"]));
}

#[test]
fn solve_rejects_malformed_input() {
    let out = run_with_stdin(&["solve"], b"{ \"types\": [");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));

    let out = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_policy_flags() {
    let example = fixture("paper_example.json");
    let path = example.to_str().unwrap();
    let out = run(&["solve", "--trace", "--policy", "largest-deficit", path]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["trace"]["events"][0]["type"], "t3");
    assert_eq!(doc["members"], serde_json::json!(["c3", "c4"]));

    let out = run(&["solve", "--type-order", "t9", path]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--policy", "bogus", path]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    let example = fixture("paper_example.json");
    let path = example.to_str().unwrap();

    let out = run(&["check", path, "--committee", "c3,c4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["type_optimal"], true);

    let out = run(&["check", path, "--committee", "c2,c3"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(
        doc["report"]["optimality_witness"],
        serde_json::json!({"out": "c2", "in": "c4"})
    );

    let out = run(&["check", path, "--committee", "c1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["check", path, "--committee", "c1,c9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_instance_and_batch() {
    let example = fixture("paper_example.json");
    let path = example.to_str().unwrap();
    assert_eq!(run(&["verify", path]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--cap", "5", path]).status.code(), Some(2));

    let counterexample = fixture("single_pass_counterexample.json");
    assert_eq!(
        run(&["verify", counterexample.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    let out = run(&["verify", "--seed", "1..100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], 100);

    let out = run(&[
        "verify", "--seed", "1..20", "--m", "9", "--l", "3", "--k", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "verify", "--seed", "1..2", "--m", "40", "--k", "20", "--cap", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", path, "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--seed", "9..3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_is_deterministic_and_pipes_into_solve() {
    let args = [
        "generate", "--seed", "1", "--m", "6", "--l", "3", "--k", "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let solved = run_with_stdin(&["solve"], &a.stdout);
    assert_eq!(solved.status.code(), Some(0));
    assert_eq!(json(&solved)["members"].as_array().unwrap().len(), 3);

    assert_eq!(
        run(&["generate", "--m", "3", "--k", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["generate", "--density", "2"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "x.json"]).status.code(), Some(2));
}
