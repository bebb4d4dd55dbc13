//! Domain types shared by every stage: sessions, questionnaires, telemetry,
//! the fixed attribute registry and the label schemes.
//!
//! The registry has 34 entries in four groups: 9 profile answers, the 8
//! pre-session VRSQ item scores, 12 per-frame game fields and 5 game
//! configuration switches. The per-frame discomfort report is the class and
//! never appears as an attribute.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result, Violation};

/// Self-reported discomfort, 0 (none) to 3 (severe).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum DiscomfortLevel {
    None = 0,
    Slight = 1,
    Moderate = 2,
    Severe = 3,
}

impl DiscomfortLevel {
    pub const ALL: [DiscomfortLevel; 4] =
        [Self::None, Self::Slight, Self::Moderate, Self::Severe];

    pub fn value(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for DiscomfortLevel {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Self::None),
            1 => Ok(Self::Slight),
            2 => Ok(Self::Moderate),
            3 => Ok(Self::Severe),
            other => Err(format!("discomfort level {other} outside 0..=3")),
        }
    }
}

impl From<DiscomfortLevel> for u8 {
    fn from(level: DiscomfortLevel) -> u8 {
        level.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Posture {
    Sitting,
    Standing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserProfile {
    pub gender: Gender,
    pub age: u32,
    /// 0 (never used VR) to 3 (frequent user).
    pub vr_experience: u8,
    pub flicker_sensitivity: bool,
    pub pre_symptoms: bool,
    pub wears_glasses: bool,
    pub vision_impairment: bool,
    pub posture: Posture,
    pub dominant_eye: Eye,
}

pub const MIN_AGE: u32 = 13;

/// Canonical VRSQ symptom names, in registry order.
pub const VRSQ_SYMPTOMS: [&str; 8] = [
    "general discomfort",
    "fatigue",
    "eyestrain",
    "difficulty focusing",
    "headache",
    "fullness of head",
    "blurred vision",
    "dizziness",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pre,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymptomScore {
    pub symptom_name: String,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrsqReport {
    pub items: Vec<SymptomScore>,
    pub phase: Phase,
}

impl VrsqReport {
    /// Builds a report with the canonical symptom names from 8 scores.
    pub fn from_scores(phase: Phase, scores: [u8; 8]) -> Self {
        let items = VRSQ_SYMPTOMS
            .iter()
            .zip(scores)
            .map(|(name, score)| SymptomScore { symptom_name: (*name).to_string(), score })
            .collect();
        Self { items, phase }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelemetryFrame {
    pub timestamp: f64,
    pub speed: f64,
    pub acceleration: f64,
    pub rotation_x: f64,
    pub rotation_y: f64,
    pub rotation_z: f64,
    pub position_x: f64,
    pub position_y: f64,
    pub position_z: f64,
    pub region_of_interest: u32,
    pub fov_size: f64,
    pub frame_rate: f64,
    #[serde(default)]
    pub reported_discomfort: Option<DiscomfortLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub static_rest_frame: bool,
    pub haptic_feedback: bool,
    /// 0 = none, 1 = partial, 2 = full user control.
    pub camera_control_level: u8,
    pub dof_simulation: bool,
    pub auto_camera: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Race,
    Flight,
}

impl Game {
    pub fn as_str(self) -> &'static str {
        match self {
            Game::Race => "race",
            Game::Flight => "flight",
        }
    }
}

impl FromStr for Game {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "race" => Ok(Game::Race),
            "flight" => Ok(Game::Flight),
            other => Err(Error::InvalidParameter(format!("unknown game `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRecord {
    pub session_id: String,
    pub game: Game,
    pub profile: UserProfile,
    pub pre_questionnaire: VrsqReport,
    #[serde(default)]
    pub post_questionnaire: Option<VrsqReport>,
    pub config: GameConfig,
    pub frames: Vec<TelemetryFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeGroup {
    Profile,
    Questionnaire,
    Game,
    Config,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Ordinal,
    Boolean,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: &'static str,
    pub group: AttributeGroup,
    pub kind: AttributeKind,
}

const fn attr(name: &'static str, group: AttributeGroup, kind: AttributeKind) -> Attribute {
    Attribute { name, group, kind }
}

pub const ATTRIBUTE_COUNT: usize = 34;

use AttributeGroup as G;
use AttributeKind as K;

pub static ATTRIBUTES: [Attribute; ATTRIBUTE_COUNT] = [
    attr("gender", G::Profile, K::Categorical),
    attr("age", G::Profile, K::Numeric),
    attr("vr_experience", G::Profile, K::Ordinal),
    attr("flicker_sensitivity", G::Profile, K::Boolean),
    attr("pre_symptoms", G::Profile, K::Boolean),
    attr("wears_glasses", G::Profile, K::Boolean),
    attr("vision_impairment", G::Profile, K::Boolean),
    attr("posture", G::Profile, K::Categorical),
    attr("dominant_eye", G::Profile, K::Categorical),
    attr("vrsq_general_discomfort", G::Questionnaire, K::Ordinal),
    attr("vrsq_fatigue", G::Questionnaire, K::Ordinal),
    attr("vrsq_eyestrain", G::Questionnaire, K::Ordinal),
    attr("vrsq_difficulty_focusing", G::Questionnaire, K::Ordinal),
    attr("vrsq_headache", G::Questionnaire, K::Ordinal),
    attr("vrsq_fullness_of_head", G::Questionnaire, K::Ordinal),
    attr("vrsq_blurred_vision", G::Questionnaire, K::Ordinal),
    attr("vrsq_dizziness", G::Questionnaire, K::Ordinal),
    attr("timestamp", G::Game, K::Numeric),
    attr("speed", G::Game, K::Numeric),
    attr("acceleration", G::Game, K::Numeric),
    attr("rotation_x", G::Game, K::Numeric),
    attr("rotation_y", G::Game, K::Numeric),
    attr("rotation_z", G::Game, K::Numeric),
    attr("position_x", G::Game, K::Numeric),
    attr("position_y", G::Game, K::Numeric),
    attr("position_z", G::Game, K::Numeric),
    attr("region_of_interest", G::Game, K::Categorical),
    attr("fov_size", G::Game, K::Numeric),
    attr("frame_rate", G::Game, K::Numeric),
    attr("static_rest_frame", G::Config, K::Boolean),
    attr("haptic_feedback", G::Config, K::Boolean),
    attr("camera_control_level", G::Config, K::Ordinal),
    attr("dof_simulation", G::Config, K::Boolean),
    attr("auto_camera", G::Config, K::Boolean),
];

/// The ordered attribute list every dataset, learner and ranking agrees on.
#[derive(Debug, Clone, Copy, Default)]
pub struct AttributeRegistry;

impl AttributeRegistry {
    pub fn entries(&self) -> &'static [Attribute] {
        &ATTRIBUTES
    }

    pub fn names(&self) -> Vec<String> {
        ATTRIBUTES.iter().map(|a| a.name.to_string()).collect()
    }

    pub fn get(&self, index: usize) -> Option<&'static Attribute> {
        ATTRIBUTES.get(index)
    }

    pub fn checksum(&self) -> String {
        names_checksum(ATTRIBUTES.iter().map(|a| a.name))
    }
}

/// Hex digest over an ordered attribute name list. Models record it so that
/// data with a different column layout is refused at prediction time.
pub fn names_checksum<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    for name in names {
        hasher.update(name.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn registry_checksum() -> String {
    AttributeRegistry.checksum()
}

/// Registry position of an attribute name.
pub fn attribute_index(name: &str) -> Result<usize> {
    if let Some(i) = ATTRIBUTES.iter().position(|a| a.name == name) {
        return Ok(i);
    }
    let nearest = ATTRIBUTES
        .iter()
        .min_by_key(|a| strsim::levenshtein(a.name, name))
        .map(|a| a.name)
        .unwrap_or(ATTRIBUTES[0].name);
    Err(Error::UnknownAttribute { name: name.to_string(), nearest: nearest.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    Binary,
    Quarterly,
}

impl LabelScheme {
    pub const ALL: [LabelScheme; 2] = [LabelScheme::Binary, LabelScheme::Quarterly];

    pub fn class_count(self) -> usize {
        match self {
            LabelScheme::Binary => 2,
            LabelScheme::Quarterly => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelScheme::Binary => "binary",
            LabelScheme::Quarterly => "quarterly",
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(LabelScheme::Binary),
            "quarterly" => Ok(LabelScheme::Quarterly),
            other => Err(Error::InvalidParameter(format!("unknown label scheme `{other}`"))),
        }
    }
}

/// A: race sessions only, B: flight only, C: both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::A, Scenario::B, Scenario::C];

    pub fn includes(self, game: Game) -> bool {
        match self {
            Scenario::A => game == Game::Race,
            Scenario::B => game == Game::Flight,
            Scenario::C => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scenario::A),
            "B" | "b" => Ok(Scenario::B),
            "C" | "c" => Ok(Scenario::C),
            other => Err(Error::InvalidParameter(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Maps a discomfort level onto a class index of the scheme.
pub fn collapse_label(level: DiscomfortLevel, scheme: LabelScheme) -> usize {
    match scheme {
        LabelScheme::Quarterly => level.value() as usize,
        LabelScheme::Binary => usize::from(level != DiscomfortLevel::None),
    }
}

/// Every broken invariant of a session. An empty list means the record is valid.
pub fn validate_session(record: &SessionRecord) -> Vec<Violation> {
    let mut out = Vec::new();

    let p = &record.profile;
    if p.age < MIN_AGE {
        out.push(Violation::session("age", format!("{} is below the minimum of {MIN_AGE}", p.age)));
    }
    if p.vr_experience > 3 {
        out.push(Violation::session("vr_experience", format!("{} outside 0..=3", p.vr_experience)));
    }

    check_vrsq(&record.pre_questionnaire, Phase::Pre, "pre_questionnaire", &mut out);
    if let Some(post) = &record.post_questionnaire {
        check_vrsq(post, Phase::Post, "post_questionnaire", &mut out);
    }

    let c = &record.config;
    if c.camera_control_level > 2 {
        out.push(Violation::session(
            "camera_control_level",
            format!("{} outside 0..=2", c.camera_control_level),
        ));
    }
    if c.auto_camera && c.camera_control_level >= 2 {
        out.push(Violation::session(
            "auto_camera",
            "automatic camera requires camera_control_level below 2",
        ));
    }

    if record.frames.is_empty() {
        out.push(Violation::session("frames", "session has no frames"));
    }
    let mut previous: Option<f64> = None;
    for (i, fr) in record.frames.iter().enumerate() {
        let finite = [
            ("timestamp", fr.timestamp),
            ("speed", fr.speed),
            ("acceleration", fr.acceleration),
            ("rotation_x", fr.rotation_x),
            ("rotation_y", fr.rotation_y),
            ("rotation_z", fr.rotation_z),
            ("position_x", fr.position_x),
            ("position_y", fr.position_y),
            ("position_z", fr.position_z),
            ("fov_size", fr.fov_size),
            ("frame_rate", fr.frame_rate),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                out.push(Violation::frame(i, field, "value is not finite"));
            }
        }
        if fr.timestamp < 0.0 {
            out.push(Violation::frame(i, "timestamp", "negative timestamp"));
        }
        if let Some(prev) = previous {
            if fr.timestamp.partial_cmp(&prev) != Some(std::cmp::Ordering::Greater) {
                out.push(Violation::frame(
                    i,
                    "timestamp order",
                    format!("{} does not follow {}", fr.timestamp, prev),
                ));
            }
        }
        previous = Some(fr.timestamp);
        for (field, v) in [("rotation_x", fr.rotation_x), ("rotation_y", fr.rotation_y), ("rotation_z", fr.rotation_z)] {
            if !(0.0..360.0).contains(&v) {
                out.push(Violation::frame(i, format!("{field} range"), format!("{v} outside [0, 360)")));
            }
        }
        if !(fr.fov_size > 0.0 && fr.fov_size <= 180.0) {
            out.push(Violation::frame(i, "fov_size range", format!("{} outside (0, 180]", fr.fov_size)));
        }
        if !(fr.frame_rate > 0.0) {
            out.push(Violation::frame(i, "frame_rate", format!("{} is not positive", fr.frame_rate)));
        }
    }
    out
}

fn check_vrsq(report: &VrsqReport, phase: Phase, field: &str, out: &mut Vec<Violation>) {
    if report.phase != phase {
        out.push(Violation::session(field, format!("phase must be {phase:?}").to_lowercase()));
    }
    if report.items.len() != VRSQ_SYMPTOMS.len() {
        out.push(Violation::session(
            field,
            format!("{} items, expected {}", report.items.len(), VRSQ_SYMPTOMS.len()),
        ));
    }
    for (i, (item, expected)) in report.items.iter().zip(VRSQ_SYMPTOMS).enumerate() {
        if item.symptom_name != expected {
            out.push(Violation::session(
                field,
                format!("item {i} is `{}`, expected `{expected}`", item.symptom_name),
            ));
        }
        if item.score > 3 {
            out.push(Violation::session(field, format!("item `{}` score {} outside 0..=3", item.symptom_name, item.score)));
        }
    }
}

#[cfg(test)]
pub(crate) use tests::sample_session;
