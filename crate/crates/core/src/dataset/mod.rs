//! Labeled feature rows assembled from sessions, scenario filtering, class
//! distributions and stratified fold planning.

mod io;

pub use io::{parse_sessions, read_dataset_csv, write_dataset_csv, write_sessions_jsonl, SessionFormat, CSV_TRAILING_COLUMNS};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    collapse_label, DiscomfortLevel, Eye, GameConfig, Gender, LabelScheme, Posture, Scenario,
    SessionRecord, TelemetryFrame, UserProfile, VrsqReport, ATTRIBUTE_COUNT,
};
use crate::seed;

/// One labeled row: 34 values in registry order plus its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; ATTRIBUTE_COUNT],
    pub label: usize,
    pub session_id: String,
    pub frame_timestamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scheme: LabelScheme,
    pub scenario: Scenario,
    pub rows: Vec<FeatureVector>,
    pub provenance: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn class_count(&self) -> usize {
        self.scheme.class_count()
    }
}

pub fn encode_gender(g: Gender) -> f64 {
    match g {
        Gender::Female => 0.0,
        Gender::Male => 1.0,
        Gender::Other => 2.0,
    }
}

pub fn encode_posture(p: Posture) -> f64 {
    match p {
        Posture::Sitting => 0.0,
        Posture::Standing => 1.0,
    }
}

pub fn encode_eye(e: Eye) -> f64 {
    match e {
        Eye::Left => 0.0,
        Eye::Right => 1.0,
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Encodes one frame and its session context into registry order.
pub fn encode_features(
    profile: &UserProfile,
    pre: &VrsqReport,
    config: &GameConfig,
    frame: &TelemetryFrame,
) -> [f64; ATTRIBUTE_COUNT] {
    let mut v = [0.0; ATTRIBUTE_COUNT];
    v[0] = encode_gender(profile.gender);
    v[1] = f64::from(profile.age);
    v[2] = f64::from(profile.vr_experience);
    v[3] = flag(profile.flicker_sensitivity);
    v[4] = flag(profile.pre_symptoms);
    v[5] = flag(profile.wears_glasses);
    v[6] = flag(profile.vision_impairment);
    v[7] = encode_posture(profile.posture);
    v[8] = encode_eye(profile.dominant_eye);
    for (slot, item) in v[9..17].iter_mut().zip(&pre.items) {
        *slot = f64::from(item.score);
    }
    v[17] = frame.timestamp;
    v[18] = frame.speed;
    v[19] = frame.acceleration;
    v[20] = frame.rotation_x;
    v[21] = frame.rotation_y;
    v[22] = frame.rotation_z;
    v[23] = frame.position_x;
    v[24] = frame.position_y;
    v[25] = frame.position_z;
    v[26] = f64::from(frame.region_of_interest);
    v[27] = frame.fov_size;
    v[28] = frame.frame_rate;
    v[29] = flag(config.static_rest_frame);
    v[30] = flag(config.haptic_feedback);
    v[31] = f64::from(config.camera_control_level);
    v[32] = flag(config.dof_simulation);
    v[33] = flag(config.auto_camera);
    v
}

/// Per-frame levels with the most recent report carried forward; frames
/// before the first report are level 0. `None` when nothing was reported.
pub fn propagate_levels(session: &SessionRecord) -> Option<Vec<DiscomfortLevel>> {
    if !session.frames.iter().any(|f| f.reported_discomfort.is_some()) {
        return None;
    }
    let mut current = DiscomfortLevel::None;
    Some(
        session
            .frames
            .iter()
            .map(|f| {
                if let Some(level) = f.reported_discomfort {
                    current = level;
                }
                current
            })
            .collect(),
    )
}

/// Copy of the session where every frame carries its propagated level.
pub fn propagate_reports(session: &SessionRecord) -> Result<SessionRecord> {
    let levels = propagate_levels(session).ok_or_else(|| Error::NoReports(session.session_id.clone()))?;
    let mut out = session.clone();
    for (frame, level) in out.frames.iter_mut().zip(levels) {
        frame.reported_discomfort = Some(level);
    }
    Ok(out)
}

fn infer_scenario(sessions: &[SessionRecord]) -> Scenario {
    use crate::model::Game;
    let race = sessions.iter().any(|s| s.game == Game::Race);
    let flight = sessions.iter().any(|s| s.game == Game::Flight);
    match (race, flight) {
        (true, false) => Scenario::A,
        (false, true) => Scenario::B,
        _ => Scenario::C,
    }
}

/// One row per frame, labeled with the propagated report under `scheme`.
pub fn assemble_features(sessions: &[SessionRecord], scheme: LabelScheme) -> Result<Dataset> {
    assemble(sessions, scheme, infer_scenario(sessions))
}

/// Filters to the scenario's games, then assembles.
pub fn assemble_scenario(sessions: &[SessionRecord], scenario: Scenario, scheme: LabelScheme) -> Result<Dataset> {
    let selected = filter_scenario(sessions, scenario);
    assemble(&selected, scheme, scenario)
}

fn assemble(sessions: &[SessionRecord], scheme: LabelScheme, scenario: Scenario) -> Result<Dataset> {
    let mut rows = Vec::with_capacity(sessions.iter().map(|s| s.frames.len()).sum());
    let mut provenance = Vec::with_capacity(sessions.len());
    for session in sessions {
        let levels = propagate_levels(session).ok_or_else(|| Error::NoReports(session.session_id.clone()))?;
        for (frame, level) in session.frames.iter().zip(levels) {
            rows.push(FeatureVector {
                values: encode_features(&session.profile, &session.pre_questionnaire, &session.config, frame),
                label: collapse_label(level, scheme),
                session_id: session.session_id.clone(),
                frame_timestamp: frame.timestamp,
            });
        }
        provenance.push(session.session_id.clone());
    }
    Ok(Dataset { scheme, scenario, rows, provenance })
}

/// Sessions of the scenario's games, order preserved.
pub fn filter_scenario(sessions: &[SessionRecord], scenario: Scenario) -> Vec<SessionRecord> {
    sessions.iter().filter(|s| scenario.includes(s.game)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: Vec<usize>,
    pub proportions: Vec<f64>,
}

pub fn class_distribution(dataset: &Dataset) -> Result<ClassDistribution> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts = vec![0usize; dataset.class_count()];
    for row in &dataset.rows {
        counts[row.label] += 1;
    }
    let n = dataset.len() as f64;
    let proportions = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(ClassDistribution { counts, proportions })
}

/// Row-to-fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// (training rows, held-out rows) for one fold, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::with_capacity(self.assignments.len());
        let mut test = Vec::with_capacity(self.assignments.len() / self.k + 1);
        for (row, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(row);
            } else {
                train.push(row);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified assignment with no size precondition.
///
/// Rows of each class are shuffled with a per-class seeded stream, then dealt
/// to folds by one running counter that continues from class to class in
/// label order, so per-class fold counts differ by at most one and class
/// remainders spread across different folds.
pub fn assign_stratified(labels: &[usize], class_count: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (row, &label) in labels.iter().enumerate() {
        by_class[label].push(row);
    }
    let mut assignments = vec![0; labels.len()];
    let mut next = 0usize;
    for (class, rows) in by_class.iter_mut().enumerate() {
        let mut rng = seed::rng(seed::derive_index(seed, "fold-class", class));
        rows.shuffle(&mut rng);
        for &row in rows.iter() {
            assignments[row] = next % k;
            next += 1;
        }
    }
    assignments
}

pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let dist = class_distribution(dataset)?;
    if let Some((class, &count)) = dist.counts.iter().enumerate().find(|(_, &c)| c > 0 && c < k) {
        return Err(Error::ClassTooSmall { class, count, k });
    }
    let assignments = assign_stratified(&dataset.labels(), dataset.class_count(), k, seed);
    Ok(FoldPlan { k, seed, assignments })
}
