//! Byte-for-byte checks of every published file format against the
//! fixtures in `tests/fixtures`. Regenerate with `CYBERSICK_BLESS=1`.

use std::path::PathBuf;
use std::sync::Arc;

use cybersick::advisor::{builtin_matrix, CauseMapping};
use cybersick::dataset::{assemble_features, assemble_scenario, parse_sessions, read_dataset_csv, write_dataset_csv, write_sessions_jsonl, SessionFormat};
use cybersick::eval::{cross_validate, rank_attributes, ranking_spec};
use cybersick::learners::{load_model, save_model, FeatureTable, LearnerKind, LearnerSpec, ModelFile};
use cybersick::model::{LabelScheme, Scenario, SessionRecord};
use cybersick::serve::{Scorer, ServeConfig};
use cybersick::synth::{generate_corpus_with_traces, write_risk_trace_csv, CorpusSpec, SimParams, RISK_TRACE_HEADER};
use cybersick::viz::{aggregate_track_heat, export_heat_csv, parse_heat_csv};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("CYBERSICK_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if expected != actual {
        let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).map_or(0, |i| i + 1);
        panic!("{name} differs from its fixture (first difference near line {line}); rerun with CYBERSICK_BLESS=1 if intended");
    }
}

/// Two race and two flight sessions of 30 frames each.
fn tiny() -> Vec<(SessionRecord, cybersick::synth::RiskTrace)> {
    let spec = CorpusSpec { race_sessions: 2, flight_sessions: 2, race_rows: 60, flight_rows: 60 };
    generate_corpus_with_traces(&spec, 3, &SimParams::default()).unwrap()
}

fn tiny_sessions() -> Vec<SessionRecord> {
    tiny().into_iter().map(|(s, _)| s).collect()
}

fn tiny_model() -> ModelFile {
    let ds = assemble_scenario(&tiny_sessions(), Scenario::C, LabelScheme::Binary).unwrap();
    let spec = LearnerSpec::default_for(LearnerKind::Tree);
    let model = spec.fit(&FeatureTable::from_dataset(&ds)).unwrap();
    ModelFile { spec, model, ranking: Some(rank_attributes(&ranking_spec(), &ds, 7).unwrap()) }
}

#[test]
fn session_jsonl() {
    let mut out = Vec::new();
    write_sessions_jsonl(&tiny_sessions(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    check("tiny.jsonl", &text);
    // Reading the fixture back gives the same sessions, floats included.
    let parsed = parse_sessions(text.as_bytes(), SessionFormat::Jsonl).unwrap();
    assert_eq!(parsed, tiny_sessions());
}

#[test]
fn risk_trace_csv() {
    let mut out = format!("{RISK_TRACE_HEADER}\n").into_bytes();
    for (s, t) in tiny() {
        write_risk_trace_csv(&s.session_id, &t, &mut out).unwrap();
    }
    check("tiny.risk.csv", &String::from_utf8(out).unwrap());
}

#[test]
fn feature_csv() {
    for scheme in LabelScheme::ALL {
        let ds = assemble_features(&tiny_sessions(), scheme).unwrap();
        let mut out = Vec::new();
        write_dataset_csv(&ds, &mut out).unwrap();
        check(&format!("tiny.{scheme}.csv"), &String::from_utf8(out.clone()).unwrap());
        let back = read_dataset_csv(out.as_slice(), scheme).unwrap();
        assert_eq!(back.rows, ds.rows);
    }
}

#[test]
fn model_file() {
    let text = save_model(&tiny_model());
    check("tiny.tree.model", &text);
    assert_eq!(save_model(&load_model(&text).unwrap()), text);
}

#[test]
fn eval_report_json() {
    let ds = assemble_scenario(&tiny_sessions(), Scenario::C, LabelScheme::Binary).unwrap();
    let report = cross_validate(&LearnerSpec::default_for(LearnerKind::Tree), &ds, 3, 7).unwrap();
    check("tiny.eval.json", &(serde_json::to_string_pretty(&report).unwrap() + "\n"));
}

#[test]
fn heat_csv() {
    let grid = aggregate_track_heat(&tiny_sessions(), (8, 8)).unwrap();
    let text = export_heat_csv(&grid);
    check("tiny.heat.csv", &text);
    assert_eq!(parse_heat_csv(&text, grid.bounds, 8, 8).unwrap(), grid);
}

#[test]
fn knowledge_base_exports() {
    check("strategy_matrix.csv", &builtin_matrix().to_csv());
    let mapping = CauseMapping::default().format();
    check("default_mapping.txt", &mapping);
    assert_eq!(CauseMapping::parse(&mapping).unwrap(), CauseMapping::default());
}

#[test]
fn serve_transcript() {
    let sessions = tiny_sessions();
    let s = &sessions[0];
    let mut requests = vec![json!({"kind": "hello", "session_id": s.session_id, "profile": s.profile, "config": s.config, "scheme": "binary"}).to_string()];
    // The last frames of a session are late and likely to carry suggestions.
    for f in &s.frames[s.frames.len() - 5..] {
        let mut v = serde_json::to_value(f).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("reported_discomfort");
        obj.insert("kind".into(), Value::from("frame"));
        obj.insert("session_id".into(), Value::from(s.session_id.clone()));
        requests.push(v.to_string());
    }
    requests.push("{\"kind\": \"frame\", \"session_id\": 3}".into());
    requests.push("not json".into());
    requests.push(json!({"kind": "end", "session_id": s.session_id}).to_string());
    let requests = requests.join("\n") + "\n";
    check("serve.requests.jsonl", &requests);

    let mut scorer = Scorer::new(Arc::new(tiny_model()), Arc::new(ServeConfig::default())).unwrap();
    let replies: String = requests.lines().map(|l| scorer.handle_line(l) + "\n").collect();
    check("serve.replies.jsonl", &replies);
}
