//! Exit codes and key output of every subcommand on the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn safebox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safebox")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn learn_writes_the_maximum_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ratios.json");
    let run = safebox(&["learn", s(&fixture("three_pairs.json")), "-o", s(&out)]);
    assert_eq!(code(&run), 0, "{run:?}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rw"], 1.9);
    assert_eq!(v["rh"], 1.2);
    assert_eq!(v["pairs"], 3);
    assert_eq!(v["dataset"], "three_pairs");
    assert_eq!(v["margin"], 1.0);
}

#[test]
fn learn_rejects_a_shrinking_margin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(code(&safebox(&["learn", s(&fixture("three_pairs.json")), "-o", s(&out), "--margin", "0.9"])), 2);
}

#[test]
fn apply_then_eval_is_fully_safe_in_sample() {
    let dir = tempfile::tempdir().unwrap();
    let ratios = dir.path().join("ratios.json");
    let post = dir.path().join("post.json");
    let report = dir.path().join("report.json");
    let csv = dir.path().join("rows.csv");
    assert_eq!(code(&safebox(&["learn", s(&fixture("three_pairs.json")), "-o", s(&ratios)])), 0);
    let run = safebox(&["apply", s(&fixture("three_pairs.json")), "--ratios", s(&ratios), "-o", s(&post)]);
    assert_eq!(code(&run), 0, "{run:?}");
    let applied = safebox::dataset::load_dataset(&post).unwrap();
    assert_eq!(applied[0].predictions[0].bbox.to_array(), [15.5, 19.0, 34.5, 31.0]);

    let run = safebox(&[
        "eval",
        s(&fixture("three_pairs.json")),
        "--ratios",
        s(&ratios),
        "-o",
        s(&report),
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&run), 0, "{run:?}");
    assert!(stdout(&run).contains("training"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["safe_rate_post"], 1.0);
    assert!((v["safe_rate_raw"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
}

#[test]
fn eval_without_ratios_and_bad_eps() {
    let run = safebox(&["eval", s(&fixture("three_pairs.json"))]);
    assert_eq!(code(&run), 0);
    assert_eq!(code(&safebox(&["eval", s(&fixture("three_pairs.json")), "--eps", "-1"])), 2);
}

#[test]
fn quadrants_prints_four_cases() {
    let run = safebox(&["quadrants"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    for case in ["a ", "b ", "c ", "d "] {
        assert!(text.lines().any(|l| l.starts_with(case)), "{text}");
    }
}

#[test]
fn prove_accepts_the_transcript_scripts() {
    let axioms = fixture("perception.json");
    let run = safebox(&["prove", s(&axioms), "E5", s(&fixture("e5.script"))]);
    assert_eq!(code(&run), 0, "{run:?}");
    assert!(stdout(&run).trim_end().ends_with("Q.E.D."));
    let run = safebox(&["prove", s(&axioms), "G1", s(&fixture("g1.script")), "--use", "E1,E5"]);
    assert_eq!(code(&run), 0, "{run:?}");
    assert!(stdout(&run).contains("Q.E.D."));
}

#[test]
fn prove_rejections_exit_one() {
    let axioms = fixture("perception.json");
    let run = safebox(&["prove", s(&axioms), "E5", s(&fixture("e5_incomplete.script"))]);
    assert_eq!(code(&run), 1);
    assert!(stdout(&run).contains("rejected at step"));
    // G1's script cites E5, which is not an axiom unless asked for
    assert_eq!(code(&safebox(&["prove", s(&axioms), "G1", s(&fixture("g1.script"))])), 1);
}

#[test]
fn derive_matches_the_sufficiency_findings() {
    let axioms = fixture("perception.json");
    let run = safebox(&["derive", s(&axioms), "G1", "--depth", "3"]);
    assert_eq!(code(&run), 0, "{run:?}");
    assert!(stdout(&run).contains("checker: accepted"));
    let run = safebox(&["derive", s(&axioms), "G1", "--depth", "3", "--use", "E1,E2"]);
    assert_eq!(code(&run), 1);
    assert!(stdout(&run).contains("not derivable"));
    assert_eq!(code(&safebox(&["derive", s(&axioms), "G1", "--use", "E1,E2,E4"])), 1);
}

#[test]
fn derive_accepts_formula_text_goals() {
    let run = safebox(&[
        "derive",
        s(&fixture("perception.json")),
        "FORALL d:IMG: Training(d) -> Cover(Enlarge(DNN(d)), ground_truth(d))",
        "--use",
        "E2,E3,E4",
    ]);
    assert_eq!(code(&run), 0, "{run:?}");
}

#[test]
fn case_assessment_gates_on_soundness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("case.json");
    let run = safebox(&["case", "assess", s(&fixture("case_e1_e2.json"))]);
    assert_eq!(code(&run), 1);
    assert!(stdout(&run).contains("upper-bound-only"));

    let run = safebox(&["case", "assess", s(&fixture("case_e1_e4.json")), "-o", s(&report)]);
    assert_eq!(code(&run), 0, "{run:?}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["goals"][0]["soundness"], "sound");
    assert_eq!(v["goals"][0]["belief"], 1.0);
    assert!(v["goals"][0]["proof"]["traces"].as_object().unwrap().len() >= 2);

    let run = safebox(&["case", "assess", s(&fixture("case_e1_e4.json")), "--rule", "yager"]);
    assert_eq!(code(&run), 0);
    assert!(stdout(&run).contains("via yager"));
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(code(&safebox(&[])), 2);
    assert_eq!(code(&safebox(&["frobnicate"])), 2);
    assert_eq!(code(&safebox(&["learn", s(&fixture("three_pairs.json"))])), 2);
    assert_eq!(code(&safebox(&["eval", "/definitely/not/here.json"])), 2);
    assert_eq!(code(&safebox(&["derive", s(&fixture("perception.json")), "G1", "--depth", "0"])), 2);
    assert_eq!(code(&safebox(&["derive", s(&fixture("perception.json")), "G1", "--use", "E9"])), 2);
    assert_eq!(code(&safebox(&["prove", s(&fixture("perception.json")), "Cover(", s(&fixture("e5.script"))])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"images": [{"id": "cam3-17", "width": 9, "height": 9, "split": "odd", "labels": [{"bbox": [5, 5, 5, 9]}]}]}"#,
    )
    .unwrap();
    let run = safebox(&["eval", s(&bad)]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("cam3-17"));
}

#[test]
fn help_documents_every_subcommand() {
    let run = safebox(&["--help"]);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    for sub in ["learn", "apply", "eval", "quadrants", "prove", "derive", "case"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
