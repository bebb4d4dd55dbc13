//! Streaming scorer: one JSON object per line in, one reply line out.
//!
//! Requests carry a `kind` of `hello`, `frame` or `end`; every reply carries
//! `"ok"`. See `docs/report-schema.md` for the full message shapes.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::advisor::{advise_with_evidence, Cause, CauseEvidence, CauseMapping, FrameStats, Strategy, DEFAULT_THRESHOLD};
use crate::dataset::encode_features;
use crate::error::Result;
use crate::learners::ModelFile;
use crate::model::{GameConfig, LabelScheme, Phase, TelemetryFrame, UserProfile, VrsqReport, ATTRIBUTE_COUNT};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub threshold: f64,
    /// Ranked attributes consulted when inferring causes.
    pub top_n: usize,
    /// Causes are re-inferred from session statistics every this many frames.
    pub refresh_every: usize,
    pub mapping: CauseMapping,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD, top_n: 5, refresh_every: 100, mapping: CauseMapping::default() }
    }
}

#[derive(Deserialize)]
struct Kind<'a> {
    #[serde(borrow)]
    kind: std::borrow::Cow<'a, str>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Hello {
    #[allow(dead_code)]
    kind: String,
    session_id: String,
    profile: UserProfile,
    config: GameConfig,
    scheme: LabelScheme,
    /// Absent means all eight symptoms scored 0.
    #[serde(default)]
    pre_questionnaire: Option<VrsqReport>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Frame {
    #[allow(dead_code)]
    kind: String,
    session_id: String,
    timestamp: f64,
    speed: f64,
    acceleration: f64,
    rotation_x: f64,
    rotation_y: f64,
    rotation_z: f64,
    position_x: f64,
    position_y: f64,
    position_z: f64,
    region_of_interest: u32,
    fov_size: f64,
    frame_rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct End {
    #[allow(dead_code)]
    kind: String,
    session_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionMsg {
    pub cause: Cause,
    pub strategies: Vec<Strategy>,
}

/// Every reply. Fields irrelevant to a reply kind are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub ok: bool,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub session_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scheme: Option<LabelScheme>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suggestions: Option<Vec<SuggestionMsg>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frames_seen: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_predicted_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Byte offset of a syntax or schema error within the request line.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub offset: Option<usize>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub session_closed: bool,
}

impl Reply {
    fn new(kind: &str, session_id: Option<String>) -> Self {
        Self {
            ok: true,
            kind: kind.to_string(),
            session_id,
            scheme: None,
            timestamp: None,
            predicted_class: None,
            predicted_level: None,
            distribution: None,
            suggestions: None,
            frames_seen: None,
            mean_predicted_level: None,
            error: None,
            offset: None,
            session_closed: false,
        }
    }

    fn error(message: impl Into<String>, session_id: Option<String>, offset: Option<usize>) -> Self {
        Self { ok: false, error: Some(message.into()), offset, ..Self::new("error", session_id) }
    }
}

struct SessionState {
    profile: UserProfile,
    pre: VrsqReport,
    config: GameConfig,
    rows: Vec<[f64; ATTRIBUTE_COUNT]>,
    last_timestamp: Option<f64>,
    predicted_sum: usize,
    causes: Vec<CauseEvidence>,
}

/// Protocol state of one connection. The model is shared read-only.
pub struct Scorer {
    model: Arc<ModelFile>,
    config: Arc<ServeConfig>,
    sessions: HashMap<String, SessionState>,
}

/// Byte offset within a single-line document from a serde_json error.
fn offset_of(e: &serde_json::Error, line: &str) -> usize {
    line.char_indices().nth(e.column().saturating_sub(1)).map_or(line.len(), |(i, _)| i)
}

impl Scorer {
    /// Refuses models whose column layout differs from the registry.
    pub fn new(model: Arc<ModelFile>, config: Arc<ServeConfig>) -> Result<Self> {
        model.model.check_registry()?;
        Ok(Self { model, config, sessions: HashMap::new() })
    }

    pub fn open_sessions(&self) -> usize {
        self.sessions.len()
    }

    /// Handles one request line (without its terminator) and returns the reply.
    pub fn handle(&mut self, line: &str) -> Reply {
        let kind = match serde_json::from_str::<Kind>(line) {
            Ok(k) => k.kind.into_owned(),
            Err(e) => {
                // Re-parse as a bare value to tell bad JSON from a missing kind.
                return match serde_json::from_str::<serde_json::Value>(line) {
                    Err(e) => Reply::error(format!("malformed JSON: {e}"), None, Some(offset_of(&e, line))),
                    Ok(_) => Reply::error(format!("invalid request: {e}"), None, Some(0)),
                };
            }
        };
        let bad = |e: serde_json::Error| Reply::error(format!("invalid {kind} message: {e}"), None, Some(offset_of(&e, line)));
        match kind.as_str() {
            "hello" => match serde_json::from_str::<Hello>(line) {
                Ok(h) => self.hello(h),
                Err(e) => bad(e),
            },
            "frame" => match serde_json::from_str::<Frame>(line) {
                Ok(f) => self.frame(f),
                Err(e) => bad(e),
            },
            "end" => match serde_json::from_str::<End>(line) {
                Ok(e) => self.end(e),
                Err(e) => bad(e),
            },
            other => Reply::error(format!("unknown message kind `{other}`"), None, Some(0)),
        }
    }

    /// [`Scorer::handle`] serialized as one JSON line without the newline.
    pub fn handle_line(&mut self, line: &str) -> String {
        serde_json::to_string(&self.handle(line)).expect("replies serialize")
    }

    fn infer(&self, stats: Option<&FrameStats>) -> Vec<CauseEvidence> {
        match &self.model.ranking {
            Some(r) => self.config.mapping.infer(r, stats, self.config.top_n).map(|c| c.causes).unwrap_or_default(),
            None => Vec::new(),
        }
    }

    fn hello(&mut self, h: Hello) -> Reply {
        let id = Some(h.session_id.clone());
        if h.scheme != self.model.model.scheme() {
            return Reply::error(format!("model predicts the {} scheme, session asked for {}", self.model.model.scheme(), h.scheme), id, None);
        }
        if self.sessions.contains_key(&h.session_id) {
            return Reply::error("session already open", id, None);
        }
        let causes = self.infer(None);
        let pre = h.pre_questionnaire.unwrap_or_else(|| VrsqReport::from_scores(Phase::Pre, [0; 8]));
        self.sessions.insert(
            h.session_id,
            SessionState { profile: h.profile, pre, config: h.config, rows: Vec::new(), last_timestamp: None, predicted_sum: 0, causes },
        );
        Reply { scheme: Some(self.model.model.scheme()), ..Reply::new("ack", id) }
    }

    fn frame(&mut self, f: Frame) -> Reply {
        let id = Some(f.session_id.clone());
        let Some(state) = self.sessions.get_mut(&f.session_id) else {
            return Reply::error("unknown session", id, None);
        };
        let frame = TelemetryFrame {
            timestamp: f.timestamp,
            speed: f.speed,
            acceleration: f.acceleration,
            rotation_x: f.rotation_x,
            rotation_y: f.rotation_y,
            rotation_z: f.rotation_z,
            position_x: f.position_x,
            position_y: f.position_y,
            position_z: f.position_z,
            region_of_interest: f.region_of_interest,
            fov_size: f.fov_size,
            frame_rate: f.frame_rate,
            reported_discomfort: None,
        };
        if let Some(prev) = state.last_timestamp {
            if !(frame.timestamp > prev) {
                self.sessions.remove(&f.session_id);
                let mut r = Reply::error(format!("timestamp {} does not follow {prev}; session closed", frame.timestamp), id, None);
                r.session_closed = true;
                return r;
            }
        }
        let values = encode_features(&state.profile, &state.pre, &state.config, &frame);
        let (dist, label) = match (self.model.model.distribution_for(&values), self.model.model.label_for(&values)) {
            (Ok(d), Ok(l)) => (d, l),
            (Err(e), _) | (_, Err(e)) => return Reply::error(e.to_string(), id, None),
        };
        state.last_timestamp = Some(frame.timestamp);
        state.rows.push(values);
        state.predicted_sum += label;
        let seen = state.rows.len();
        if seen % self.config.refresh_every.max(1) == 0 {
            let stats = FrameStats::from_rows(state.rows.iter());
            let causes = self.infer(Some(&stats));
            self.sessions.get_mut(&f.session_id).expect("session present").causes = causes;
        }
        let state = &self.sessions[&f.session_id];
        let suggestions = advise_with_evidence(&dist, &state.causes, self.config.threshold)
            .into_iter()
            .map(|s| SuggestionMsg { cause: s.cause, strategies: s.strategies })
            .collect();
        let scheme = self.model.model.scheme();
        Reply {
            timestamp: Some(frame.timestamp),
            predicted_class: (scheme == LabelScheme::Binary).then_some(label),
            predicted_level: (scheme == LabelScheme::Quarterly).then_some(label),
            distribution: Some(dist),
            suggestions: Some(suggestions),
            ..Reply::new("prediction", id)
        }
    }

    fn end(&mut self, e: End) -> Reply {
        let id = Some(e.session_id.clone());
        let Some(state) = self.sessions.remove(&e.session_id) else {
            return Reply::error("unknown session", id, None);
        };
        let n = state.rows.len();
        let mean = if n == 0 { 0.0 } else { state.predicted_sum as f64 / n as f64 };
        Reply { frames_seen: Some(n), mean_predicted_level: Some(mean), ..Reply::new("summary", id) }
    }
}

/// Serves one connection until EOF: each LF-terminated line gets exactly
/// one reply line, in order.
pub fn handle_connection<R: BufRead, W: Write>(mut reader: R, mut writer: W, mut scorer: Scorer) -> io::Result<()> {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        let reply = match std::str::from_utf8(&buf) {
            Ok(line) => scorer.handle_line(line),
            Err(e) => serde_json::to_string(&Reply::error("request is not valid UTF-8", None, Some(e.valid_up_to()))).expect("replies serialize"),
        };
        writer.write_all(reply.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
}

/// Accepts connections forever, one thread per connection.
pub fn serve(listener: TcpListener, model: Arc<ModelFile>, config: Arc<ServeConfig>) -> Result<()> {
    model.model.check_registry()?;
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let scorer = Scorer::new(Arc::clone(&model), Arc::clone(&config))?;
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            let reader = match stream.try_clone() {
                Ok(s) => io::BufReader::new(s),
                Err(e) => {
                    log::warn!("{peer}: {e}");
                    return;
                }
            };
            if let Err(e) = handle_connection(reader, stream, scorer) {
                log::warn!("{peer}: connection ended: {e}");
            }
        });
    }
    Ok(())
}
