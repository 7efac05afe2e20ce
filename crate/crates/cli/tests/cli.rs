//! End-to-end tests for the `mixed` binary: exit codes, format detection,
//! pipeline idempotence (every file the CLI writes re-validates through
//! `check`), and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixed"))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn check_accepts_every_rule_fixture() {
    let rules = fixtures().join("rules");
    let mut seen = 0;
    for entry in std::fs::read_dir(&rules).unwrap() {
        let file = entry.unwrap().path();
        let out = run(&["check", &path(&file)]);
        assert_eq!(code(&out), 0, "{}: {}", file.display(), stderr(&out));
        assert_eq!(stdout(&out).trim(), "ok");
        seen += 1;
    }
    assert_eq!(seen, 27);
}

#[test]
fn check_rejects_invalid_proof_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mlp");
    std::fs::write(&bad, "(ax \"p |- ; q\")\n").unwrap();
    let out = run(&["check", &path(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("invalid proof"));
}

#[test]
fn io_and_parse_errors_exit_3() {
    let out = run(&["check", "/no/such/file.mlp"]);
    assert_eq!(code(&out), 3);

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.mlp");
    std::fs::write(&garbage, "(ax \"p |- ; q\"").unwrap();
    let out = run(&["check", &path(&garbage)]);
    assert_eq!(code(&out), 3);

    let out = run(&["prove", "p |- q", "--policy", "bot"]);
    assert_eq!(code(&out), 3, "sequent without `;` is a parse error");

    let out = run(&["check", &path(&garbage), "--policy", "nonsense"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn normalize_removes_cuts_and_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("demo/cut.mlp");
    let output = dir.path().join("normal.mlp");
    let out = run(&[
        "normalize",
        &path(&input),
        "--policy",
        "cvars",
        "-o",
        &path(&output),
        "--trace",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("degree"), "trace goes to stderr");

    let text = std::fs::read_to_string(&output).unwrap();
    assert!(!text.contains("(cut1") && !text.contains("(cut2"));
    let check = run(&["check", &path(&output), "--policy", "cvars"]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    // same conclusion as the input's root
    let original = std::fs::read_to_string(&input).unwrap();
    let conclusion = |s: &str| s.split('"').nth(1).unwrap().to_string();
    assert_eq!(conclusion(&original), conclusion(&text));
}

#[test]
fn normalize_is_deterministic() {
    let input = fixtures().join("demo/cut.mlp");
    let a = run(&["normalize", &path(&input), "--policy", "cvars"]);
    let b = run(&["normalize", &path(&input), "--policy", "cvars"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "identical inputs give byte-identical outputs");
}

#[test]
fn translate_ll_output_passes_the_linear_checker() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("rules/imp3_l.mlp");
    let output = dir.path().join("image.llp");
    let out = run(&[
        "translate-ll",
        &path(&input),
        "--policy",
        "cvars",
        "-o",
        &path(&output),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // `check` detects the linear format from the root tag
    let check = run(&["check", &path(&output)]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));
}

#[test]
fn lk_embed_extract_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let lk = fixtures().join("demo/excluded_middle.lk");
    let mixed = dir.path().join("em.mlp");
    let back = dir.path().join("em.lk");

    let out = run(&["check", &path(&lk)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = run(&["embed-lk", &path(&lk), "--policy", "cvars", "-o", &path(&mixed)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let check = run(&["check", &path(&mixed), "--policy", "cvars"]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    let out = run(&["extract-lk", &path(&mixed), "--policy", "cvars", "-o", &path(&back)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let check = run(&["check", &path(&back)]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    let original = std::fs::read_to_string(&lk).unwrap();
    let roundtrip = std::fs::read_to_string(&back).unwrap();
    let conclusion = |s: &str| s.split('"').nth(1).unwrap().to_string();
    assert_eq!(conclusion(&original), conclusion(&roundtrip));
}

#[test]
fn lj_embed_extract_roundtrip_and_hypothesis_failure() {
    let dir = tempfile::tempdir().unwrap();
    let lj = fixtures().join("demo/k_combinator.lj");
    let mixed = dir.path().join("k.mlp");
    let back = dir.path().join("k.lj");

    let out = run(&["embed-lj", &path(&lj), "--policy", "bot", "-o", &path(&mixed)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let check = run(&["check", &path(&mixed), "--policy", "bot"]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    let out = run(&["extract-lj", &path(&mixed), "--policy", "bot", "-o", &path(&back)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let check = run(&["check", &path(&back)]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    // under the all-formulas policy the disjointness hypothesis fails
    let out = run(&["embed-lj", &path(&lj), "--policy", "all"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("I ∩ P"));
}

#[test]
fn prove_writes_checkable_proofs_and_reports_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("peirce.mlp");
    let out = run(&[
        "prove",
        "|- ((x_c -> y_c) -> x_c) -> x_c ;",
        "--policy",
        "cvars",
        "--depth",
        "12",
        "-o",
        &path(&proof),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let check = run(&["check", &path(&proof), "--policy", "cvars"]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));

    let out = run(&["prove", "|- ; p | (p -> 0)", "--policy", "bot", "--depth", "12"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("unknown (bound reached)"));
}

#[test]
fn policy_check_reports_roles() {
    let set = fixtures().join("demo/classical_set.txt");
    let out = run(&["policy-check", &path(&set), "--policy", "cvars", "--as", "lk"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("stable: yes"));

    let out = run(&["policy-check", &path(&set), "--policy", "cvars", "--as", "lj"]);
    assert_eq!(code(&out), 2);

    // an unstable set fails even without a role
    let dir = tempfile::tempdir().unwrap();
    let unstable = dir.path().join("unstable.txt");
    std::fs::write(&unstable, "p & q\n").unwrap();
    let out = run(&["policy-check", &path(&unstable), "--policy", "all"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("stable: no"));
}
