//! End-to-end command-line tests over the shipped fixture files.

use std::path::PathBuf;

use assert_cmd::Command;
use predicates::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn cmd() -> Command {
    Command::cargo_bin("symstruct").unwrap()
}

#[test]
fn model_check_accepts_irreflexivity() {
    cmd()
        .arg("mc")
        .arg(fixture("fig_tree.sst"))
        .arg(fixture("fig_irrefl.fol"))
        .assert()
        .success()
        .stdout(predicate::str::contains("valid"));
}

#[test]
fn well_definedness_of_the_tree_structure() {
    cmd()
        .arg("wf")
        .arg(fixture("fig_tree.sst"))
        .assert()
        .success()
        .stdout(predicate::str::contains("well-defined"));
}

#[test]
fn fragment_check_accepts_the_progressive_sentence() {
    cmd()
        .arg("check-fragment")
        .arg(fixture("progressive.fol"))
        .assert()
        .success()
        .stdout(predicate::str::contains("member"));
}

#[test]
fn construct_emits_the_chain_structure() {
    cmd()
        .arg("construct")
        .arg(fixture("chain_tot.fol"))
        .arg(fixture("chain_tot.prof"))
        .args(["--flavor", "tot"])
        .assert()
        .success()
        .stdout(predicate::str::contains("(+ x1 -2)"))
        .stdout(predicate::str::contains("(+ x1 1)"));
}

#[test]
fn decide_finds_a_witness_for_the_progressive_sentence() {
    let dir = tempdir("decide");
    let witness = dir.join("witness.sst");
    cmd()
        .arg("decide")
        .arg(fixture("progressive.fol"))
        .args(["--flavor", "tot", "-o"])
        .arg(&witness)
        .assert()
        .success()
        .stdout(predicate::str::contains("sat"));
    let text = std::fs::read_to_string(&witness).unwrap();
    assert!(text.contains("(node"), "witness file holds a structure");
    // the emitted witness model-checks against the sentence
    cmd()
        .arg("mc")
        .arg(&witness)
        .arg(fixture("progressive.fol"))
        .assert()
        .success();
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn finite_search_rejects_the_progressive_sentence_under_the_axiom() {
    cmd()
        .arg("finite-search")
        .arg(fixture("progressive.fol"))
        .args(["--flavor", "tot", "--bound", "3"])
        .assert()
        .code(1)
        .stdout(predicate::str::contains("no model"));
}

#[test]
fn profile_round_trips_through_a_finite_model() {
    let dir = tempdir("profile");
    let fin = dir.join("model.fin");
    // two incomparable constants have a two-element finite model
    let fol = dir.join("two.fol");
    std::fs::write(
        &fol,
        "(sort s inf)(rel lt (s s))(order lt)(const a s)(const b s)\n\
         (and (not (lt a b)) (not (lt b a)) (not (= a b)))",
    )
    .unwrap();
    cmd()
        .arg("finite-search")
        .arg(&fol)
        .args(["--flavor", "pref", "--bound", "2", "-o"])
        .arg(&fin)
        .assert()
        .success();
    cmd()
        .arg("profile")
        .arg(&fin)
        .arg(&fol)
        .assert()
        .success()
        .stdout(predicate::str::contains("(class"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unreadable_input_exits_with_usage_error() {
    cmd().arg("mc").arg("no-such-file.sst").arg("nope.fol").assert().code(3);
}

fn tempdir(label: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("symstruct-cli-{}-{label}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
