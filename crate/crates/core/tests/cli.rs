//! CLI exit-code and end-to-end behavior tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dubalign::features::FeatureWeights;
use dubalign::io::{write_weights, WeightsFile};
use dubalign::metrics::MetricParams;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dubalign")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn CLI")
}

fn write_weights_file(dir: &Path) -> PathBuf {
    let path = dir.join("weights.json");
    write_weights(&path, &WeightsFile::new(&FeatureWeights::uniform(), MetricParams::default())).unwrap();
    path
}

const GOOD_CLIP: &str = r#"{"id":"c1","lang_src":"en","lang_tgt":"es","sentences":[{"src_words":[{"w":"hello","start_ms":0,"end_ms":400},{"w":"there","start_ms":450,"end_ms":900},{"w":"friend","start_ms":1400,"end_ms":1900}],"tgt_text":"hola amigo, querido amigo","onscreen":true,"ref_breakpoints":[2,4]}]}"#;

#[test]
fn align_succeeds_on_valid_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, format!("{GOOD_CLIP}\n")).unwrap();
    let weights = write_weights_file(dir.path());
    let out = dir.path().join("out.jsonl");
    let output = run(&[
        "align", "--mode", "iso",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2); // header + one sentence
    assert!(text.contains(r#""breakpoints""#));
}

#[test]
fn malformed_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, "this is not json\n").unwrap();
    let weights = write_weights_file(dir.path());
    let out = dir.path().join("out.jsonl");
    let output = run(&[
        "align", "--mode", "iso",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 1"));
}

#[test]
fn infeasible_segmentation_exits_3() {
    // two source phrases but a one-word target
    let clip = r#"{"id":"c1","lang_src":"en","lang_tgt":"es","sentences":[{"src_words":[{"w":"hello","start_ms":0,"end_ms":400},{"w":"friend","start_ms":1400,"end_ms":1900}],"tgt_text":"hola","onscreen":true}]}"#;
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, format!("{clip}\n")).unwrap();
    let weights = write_weights_file(dir.path());
    let out = dir.path().join("out.jsonl");
    let output = run(&[
        "align", "--mode", "onoff",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("infeasible"));
}

#[test]
fn broken_duration_plugin_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, format!("{GOOD_CLIP}\n")).unwrap();
    let weights = write_weights_file(dir.path());
    let out = dir.path().join("out.jsonl");
    let output = run(&[
        "align", "--mode", "iso",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--duration-cmd", "true",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn evaluate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, format!("{GOOD_CLIP}\n")).unwrap();
    let weights = write_weights_file(dir.path());
    let out = dir.path().join("out.jsonl");
    assert!(run(&[
        "align", "--mode", "iso",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ])
    .status
    .success());
    let report = dir.path().join("report.json");
    let output = run(&[
        "evaluate",
        "--alignments", out.to_str().unwrap(),
        "--corpus", corpus.to_str().unwrap(),
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    for field in ["smoothness", "fluency", "wer", "intelligibility", "length_compliance", "segmentation_accuracy"] {
        assert!(text.contains(field), "missing {field} in report");
    }
}

#[test]
fn simulate_then_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("sim.jsonl");
    assert!(run(&["simulate", "--clips", "3", "--seed", "5", "--offscreen-ratio", "0.5", "--out", corpus.to_str().unwrap()])
        .status
        .success());
    let tuned = dir.path().join("tuned.json");
    assert!(run(&["tune", "step1", "--corpus", corpus.to_str().unwrap(), "--grid-step", "0.5", "--out-weights", tuned.to_str().unwrap()])
        .status
        .success());
    let out = dir.path().join("out.jsonl");
    assert!(run(&["align", "--mode", "onoff", "--corpus", corpus.to_str().unwrap(), "--weights", tuned.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status
        .success());
    let report = dir.path().join("report.json");
    assert!(run(&["evaluate", "--alignments", out.to_str().unwrap(), "--corpus", corpus.to_str().unwrap(), "--report", report.to_str().unwrap()])
        .status
        .success());
}

#[test]
fn unknown_mode_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(&corpus, format!("{GOOD_CLIP}\n")).unwrap();
    let weights = write_weights_file(dir.path());
    let output = run(&[
        "align", "--mode", "sideways",
        "--corpus", corpus.to_str().unwrap(),
        "--weights", weights.to_str().unwrap(),
        "--out", dir.path().join("out.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}
