use cybersick::learners::{save_model, FeatureTable, LearnerKind, LearnerSpec, ModelFile};
use cybersick::dataset::assemble_scenario;
use cybersick::eval::{rank_attributes, ranking_spec};
use cybersick::model::{LabelScheme, Scenario, SessionRecord};
use cybersick::synth::{generate_corpus, CorpusSpec, SimParams};
use serde_json::{json, Value};

pub fn corpus() -> Vec<SessionRecord> {
    generate_corpus(&CorpusSpec::from_counts(2, 2), 11, &SimParams::default()).unwrap()
}

/// Model text for a small tree with an attached ranking.
pub fn model_text(sessions: &[SessionRecord]) -> String {
    let ds = assemble_scenario(sessions, Scenario::C, LabelScheme::Binary).unwrap();
    let spec = LearnerSpec::default_for(LearnerKind::Tree);
    let model = spec.fit(&FeatureTable::from_dataset(&ds)).unwrap();
    let ranking = Some(rank_attributes(&ranking_spec(), &ds, 7).unwrap());
    save_model(&ModelFile { spec, model, ranking })
}

/// hello, `frames` frames and end for one session, one JSON object per entry.
pub fn session_lines(s: &SessionRecord, frames: usize) -> Vec<String> {
    let mut lines = vec![json!({"kind": "hello", "session_id": s.session_id, "profile": s.profile, "config": s.config, "scheme": "binary"}).to_string()];
    for f in s.frames.iter().take(frames) {
        let mut v = serde_json::to_value(f).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("reported_discomfort");
        obj.insert("kind".into(), Value::from("frame"));
        obj.insert("session_id".into(), Value::from(s.session_id.clone()));
        lines.push(v.to_string());
    }
    lines.push(json!({"kind": "end", "session_id": s.session_id}).to_string());
    lines
}
