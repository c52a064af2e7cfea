use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pfaffmatch_cli::RunReport;

const C4: &str = r#"{"problem": "exact-matching", "vertices": ["1","2","3","4"],
    "edges": [["1","2"],["2","3"],["3","4"],["4","1"]], "red": [0, 2], "m": M}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfaffmatch"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> RunReport {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn decide_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let yes = write(dir.path(), "c4-2.json", &C4.replace('M', "2"));
    let no = write(dir.path(), "c4-1.json", &C4.replace('M', "1"));
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"problem\": \"exact-matching\", \"vertices\": 3}",
    );

    let out = run(&["decide", yes.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out).answer, "TRUE");

    let out = run(&["decide", no.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r.answer, "FALSE");
    assert_eq!(r.prime, Some(11));
    assert_eq!(r.failure_bound_exact, "(4/11)^20");

    let out = run(&["decide", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertices"));

    let out = run(&["decide", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["decide", yes.to_str().unwrap(), "--prime-override", "9"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["decide", yes.to_str().unwrap(), "--grid-cap", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["decide"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_is_echoed_and_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "c4.json", &C4.replace('M', "1"));
    let path = file.to_str().unwrap();

    let r = report(&run(&["construct", path]));
    let seed = r.seed.to_string();
    let a = report(&run(&["construct", path, "--seed", &seed]));
    let b = report(&run(&["construct", path, "--seed", &seed]));
    assert_eq!(a.timeless(), r.timeless());
    assert_eq!(a.timeless().to_json(), b.timeless().to_json());
}

#[test]
fn construct_pam_with_verify() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"problem": "pam", "degrees": {"a":1,"b":1,"c":1,"d":1},
        "partition": [["a","b"],["c","d"]], "pam": [[0,2],[2,0]], "blue_edges": []}"#;
    let file = write(dir.path(), "pam.json", doc);
    let out = run(&["construct", file.to_str().unwrap(), "--seed", "5", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.answer, "SOLVED");
    assert_eq!(r.verified.as_deref(), Some("agree"));
    assert_eq!(r.solution.unwrap().len(), 2);

    let file = write(
        dir.path(),
        "pam-no.json",
        &doc.replace("[[0,2],[2,0]]", "[[0,1],[1,0]]"),
    );
    let out = run(&["construct", file.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out).answer, "INFEASIBLE");
}

#[test]
fn selftest_small() {
    let out = run(&["selftest", "--size-limit", "6", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("decide"));
    assert!(!text.contains(" 1 failed"));
}
