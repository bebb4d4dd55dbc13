use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cybersick"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A small corpus, a trained tree with its ranking, in a fresh directory.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--games", "race:3,flight:3", "--seed", "5", "--out", "corpus.jsonl"]);
    ok(dir.path(), &["train", "--data", "corpus.jsonl", "--learner", "tree", "--scenario", "C", "--out", "tree.model"]);
    dir
}

#[test]
fn synth_is_deterministic_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        ok(dir.path(), &["synth", "--games", "race:2,flight:1", "--seed", "9", "--out", name]);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 3);
    let traces = std::fs::read_to_string(dir.path().join("a.jsonl.risk.csv")).unwrap();
    assert!(traces.starts_with("session_id,timestamp,r,latent_level\n"));

    ok(dir.path(), &["synth", "--games", "race:2", "--seed", "9", "--format", "csv", "--out", "c.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.starts_with("gender,age,"));
}

#[test]
fn pipeline_train_predict_advise_rank() {
    let dir = workspace();
    let d = dir.path();
    let model = std::fs::read_to_string(d.join("tree.model")).unwrap();
    assert!(model.starts_with("cybersick-model 1\nlearner tree\n"));
    assert!(model.contains("\nranking 34 "));

    let predictions = ok(d, &["predict", "--model", "tree.model", "--data", "corpus.jsonl"]);
    let first: Value = serde_json::from_str(predictions.lines().next().unwrap()).unwrap();
    assert_eq!(first["distribution"].as_array().unwrap().len(), 2);
    let csv = ok(d, &["predict", "--model", "tree.model", "--data", "corpus.jsonl", "--format", "csv"]);
    assert_eq!(csv.lines().next(), Some("session_id,timestamp,predicted,p0,p1"));
    assert_eq!(csv.lines().count(), predictions.lines().count() + 1);

    let advice = ok(d, &["advise", "--model", "tree.model", "--data", "corpus.jsonl", "--threshold", "0"]);
    let sessions: Vec<Value> = advice.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(sessions.len(), 6);
    assert!(sessions.iter().all(|s| s["suggestions"].is_array() && s["discomfort_probability"].is_f64()));
    assert!(sessions.iter().any(|s| !s["suggestions"].as_array().unwrap().is_empty()));

    let ranking = ok(d, &["rank", "--data", "corpus.jsonl", "--scenario", "A", "--out", "rank.json"]);
    assert_eq!(ranking.lines().count(), 2 + 34);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(d.join("rank.json")).unwrap()).unwrap();
    assert_eq!(json["entries"].as_array().unwrap().len(), 34);
}

#[test]
fn eval_grid_round_trips_through_viz() {
    let dir = workspace();
    let d = dir.path();
    let tables = ok(d, &["eval", "--data", "corpus.jsonl", "--learners", "stump,tree", "--k", "3", "--out", "grid.json"]);
    assert!(tables.starts_with("Binary classification\nlearner |  A ACC |  A KPP"), "{tables}");
    assert_eq!(ok(d, &["viz", "--grid", "grid.json"]), tables);
}

#[test]
fn viz_writes_faceted_heatmaps() {
    let dir = workspace();
    let d = dir.path();
    let out = ok(d, &["viz", "--data", "corpus.jsonl", "--only", "race", "--resolution", "16x12", "--csv", "heat.csv", "--svg", "heat.svg"]);
    assert!(out.starts_with("all: "));
    // One row per populated cell of the 16x12 grid.
    let csv = std::fs::read_to_string(d.join("heat.csv")).unwrap();
    let rows: Vec<Vec<usize>> = csv.lines().skip(1).map(|l| l.split(',').take(2).map(|v| v.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[0] < 16 && r[1] < 12));
    assert!(std::fs::read_to_string(d.join("heat.svg")).unwrap().starts_with("<svg"));

    ok(d, &["viz", "--data", "corpus.jsonl", "--facet", "posture", "--csv", "p.csv"]);
    let facets: Vec<String> = std::fs::read_dir(d).unwrap().filter_map(|e| e.ok()?.file_name().into_string().ok()).filter(|n| n.starts_with("p-")).collect();
    assert!(!facets.is_empty() && facets.iter().all(|n| n.ends_with(".csv")), "{facets:?}");
}

#[test]
fn knowledge_base_exports_match_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["advise", "--export-matrix", "m.csv", "--export-mapping", "map.txt"]);
    for (out, golden) in [("m.csv", "strategy_matrix.csv"), ("map.txt", "default_mapping.txt")] {
        assert_eq!(std::fs::read_to_string(dir.path().join(out)).unwrap(), std::fs::read_to_string(fixture(golden)).unwrap());
    }
}

#[test]
fn ingest_converts_between_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::copy(fixture("tiny.jsonl"), d.join("tiny.jsonl")).unwrap();
    let jsonl = ok(d, &["ingest", "--data", "tiny.jsonl"]);
    assert_eq!(jsonl, std::fs::read_to_string(fixture("tiny.jsonl")).unwrap());
    let csv = ok(d, &["ingest", "--data", "tiny.jsonl", "--format", "csv", "--scheme", "binary"]);
    assert_eq!(csv, std::fs::read_to_string(fixture("tiny.binary.csv")).unwrap());
    let race = ok(d, &["ingest", "--data", "tiny.jsonl", "--scenario", "A"]);
    assert_eq!(race.lines().count(), 2);
}

#[test]
fn exit_codes_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = run(d, &["train", "--data", "absent.jsonl", "--out", "m"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.jsonl"));
    assert_eq!(run(d, &["train", "--data"]).status.code(), Some(2));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &["train", "--data", "x", "--learner", "svm", "--out", "m"]).status.code(), Some(2));

    std::fs::write(d.join("bad.jsonl"), "{\"session_id\": 1}\n").unwrap();
    let bad = run(d, &["train", "--data", "bad.jsonl", "--out", "m"]);
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error: "));

    std::fs::write(d.join("m.model"), "cybersick-model 2\n").unwrap();
    std::fs::copy(fixture("tiny.jsonl"), d.join("tiny.jsonl")).unwrap();
    let stale = run(d, &["predict", "--model", "m.model", "--data", "tiny.jsonl"]);
    assert_eq!(stale.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&stale.stderr).contains("line 1"));

    std::fs::copy(fixture("tiny.quarterly.csv"), d.join("tiny.csv")).unwrap();
    let csv_without_game = run(d, &["ingest", "--data", "tiny.csv"]);
    assert_eq!(csv_without_game.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&csv_without_game.stderr).contains("--game"));
    let with_game = ok(d, &["ingest", "--data", "tiny.csv", "--game", "race"]);
    assert_eq!(with_game.lines().count(), 4);
}

#[test]
fn serve_answers_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::copy(fixture("tiny.tree.model"), d.join("m.model")).unwrap();
    let mut child =
        bin().current_dir(d).args(["serve", "--model", "m.model", "--port", "0"]).stderr(Stdio::piped()).stdout(Stdio::null()).spawn().unwrap();
    let mut banner = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut banner).unwrap();
    let addr = banner.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("banner {banner:?}")).to_string();

    let stream = TcpStream::connect(&addr).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let mut reader = BufReader::new(stream);
    let requests = std::fs::read_to_string(fixture("serve.requests.jsonl")).unwrap();
    writer.write_all(requests.as_bytes()).unwrap();
    let mut replies = String::new();
    for _ in requests.lines() {
        reader.read_line(&mut replies).unwrap();
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(replies, std::fs::read_to_string(fixture("serve.replies.jsonl")).unwrap());
}
