//! Attribute -> cause bridging table and cause inference from a ranking.

use serde::{Deserialize, Serialize};

use super::Cause;
use crate::dataset::encode_features;
use crate::error::{Error, Result};
use crate::eval::AttributeRanking;
use crate::model::{attribute_index, AttributeGroup, SessionRecord, ATTRIBUTES, ATTRIBUTE_COUNT};

/// Shipped mapping. Attributes not listed map to no cause.
pub const DEFAULT_MAPPING: &str = "\
# attribute = cause (or none); unlisted attributes map to none
timestamp = Exposure
speed = Locomotion
position_x = Locomotion
position_y = Locomotion
position_z = Locomotion
acceleration = Acceleration
rotation_x = CameraRotation
rotation_y = CameraRotation
rotation_z = CameraRotation
fov_size = FieldOfView
frame_rate = Latency
dof_simulation = DepthOfField
static_rest_frame = StaticRestFrame
camera_control_level = DegreeOfControl
auto_camera = DegreeOfControl
posture = PosturalInstability
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseMapping {
    /// Indexed by registry position.
    causes: [Option<Cause>; ATTRIBUTE_COUNT],
}

impl Default for CauseMapping {
    fn default() -> Self {
        Self::parse(DEFAULT_MAPPING).expect("shipped mapping parses")
    }
}

impl CauseMapping {
    /// Parses `attribute = Cause` lines; `#` starts a comment, `none` maps
    /// an attribute to no cause.
    pub fn parse(text: &str) -> Result<Self> {
        let mut causes = [None; ATTRIBUTE_COUNT];
        let mut seen = [false; ATTRIBUTE_COUNT];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (attr, cause) = line.split_once('=').ok_or_else(|| err(format!("expected `attribute = cause`, found `{line}`")))?;
            let idx = attribute_index(attr.trim()).map_err(|e| err(e.to_string()))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(err(format!("attribute `{}` mapped twice", attr.trim())));
            }
            causes[idx] = match cause.trim() {
                "none" => None,
                c => Some(c.parse::<Cause>().map_err(|e| err(e.to_string()))?),
            };
        }
        Ok(Self { causes })
    }

    /// All 34 attributes in registry order; parses back to the same mapping.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for (a, c) in ATTRIBUTES.iter().zip(&self.causes) {
            out.push_str(a.name);
            out.push_str(" = ");
            out.push_str(c.map_or("none", Cause::name));
            out.push('\n');
        }
        out
    }

    pub fn cause_of(&self, attribute: &str) -> Option<Cause> {
        attribute_index(attribute).ok().and_then(|i| self.causes[i])
    }

    /// Walks the `top_n` best-ranked attributes and collects their causes,
    /// first hit first. With session statistics, a gameplay attribute that
    /// stayed constant over the session is skipped: it cannot explain a
    /// change in discomfort.
    pub fn infer(&self, ranking: &AttributeRanking, stats: Option<&FrameStats>, top_n: usize) -> Result<InferredCauses> {
        if top_n == 0 {
            return Err(Error::InvalidParameter("top_n must be at least 1".into()));
        }
        let n = if top_n > ranking.entries.len() {
            log::warn!("top_n {top_n} exceeds the {} ranked attributes; clamped", ranking.entries.len());
            ranking.entries.len()
        } else {
            top_n
        };
        let mut out = InferredCauses::default();
        for (rank, entry) in ranking.entries.iter().take(n).enumerate() {
            let idx = attribute_index(&entry.attribute).ok();
            let mut note = format!("rank {}, impact {:.4}", rank + 1, entry.impact);
            if let (Some(s), Some(i)) = (stats, idx) {
                if ATTRIBUTES[i].group == AttributeGroup::Game && s.std[i] == 0.0 {
                    continue;
                }
                note.push_str(&format!("; session mean {:.3}, sd {:.3}", s.mean[i], s.std[i]));
            }
            let evidence = Evidence { attribute: entry.attribute.clone(), note };
            match idx.and_then(|i| self.causes[i]) {
                Some(cause) => match out.causes.iter_mut().find(|c| c.cause == cause) {
                    Some(existing) => existing.evidence.push(evidence),
                    None => out.causes.push(CauseEvidence { cause, evidence: vec![evidence] }),
                },
                None => out.unmapped.push(evidence),
            }
        }
        Ok(out)
    }
}

/// Inference with the shipped mapping.
pub fn infer_causes(ranking: &AttributeRanking, stats: Option<&FrameStats>, top_n: usize) -> Result<InferredCauses> {
    CauseMapping::default().infer(ranking, stats, top_n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub attribute: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseEvidence {
    pub cause: Cause,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferredCauses {
    pub causes: Vec<CauseEvidence>,
    /// Top-ranked attributes that map to no cause.
    pub unmapped: Vec<Evidence>,
}

impl InferredCauses {
    pub fn cause_list(&self) -> Vec<Cause> {
        self.causes.iter().map(|c| c.cause).collect()
    }
}

/// Per-attribute mean and population standard deviation over a session's frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub frames: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FrameStats {
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a [f64; ATTRIBUTE_COUNT]>) -> Self {
        let mut n = 0usize;
        let mut sum = [0.0f64; ATTRIBUTE_COUNT];
        let mut sq = [0.0f64; ATTRIBUTE_COUNT];
        let rows: Vec<&[f64; ATTRIBUTE_COUNT]> = rows.into_iter().collect();
        for r in &rows {
            n += 1;
            for (s, v) in sum.iter_mut().zip(r.iter()) {
                *s += v;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| if n == 0 { 0.0 } else { s / n as f64 }).collect();
        for r in &rows {
            for ((q, v), m) in sq.iter_mut().zip(r.iter()).zip(&mean) {
                *q += (v - m) * (v - m);
            }
        }
        let std = sq.iter().map(|q| if n == 0 { 0.0 } else { (q / n as f64).sqrt() }).collect();
        Self { frames: n, mean, std }
    }

    pub fn from_session(session: &SessionRecord) -> Self {
        let rows: Vec<[f64; ATTRIBUTE_COUNT]> = session
            .frames
            .iter()
            .map(|f| encode_features(&session.profile, &session.pre_questionnaire, &session.config, f))
            .collect();
        Self::from_rows(rows.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::RankEntry;

    fn ranking(names: &[&str]) -> AttributeRanking {
        let mut names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        for a in ATTRIBUTES.iter() {
            if !names.iter().any(|n| n == a.name) {
                names.push(a.name.to_string());
            }
        }
        AttributeRanking {
            baseline_accuracy: 1.0,
            entries: names.into_iter().map(|attribute| RankEntry { attribute, accuracy_without: 1.0, impact: 0.0 }).collect(),
        }
    }

    #[test]
    fn timestamp_first_gives_exposure() {
        let r = infer_causes(&ranking(&["timestamp"]), None, 3).unwrap();
        assert_eq!(r.causes[0].cause, Cause::Exposure);
    }

    #[test]
    fn rotation_then_acceleration() {
        let r = infer_causes(&ranking(&["rotation_z", "acceleration"]), None, 2).unwrap();
        assert_eq!(r.cause_list(), vec![Cause::CameraRotation, Cause::Acceleration]);
    }

    #[test]
    fn profile_only_keeps_evidence() {
        let r = infer_causes(&ranking(&["age", "gender", "vr_experience"]), None, 3).unwrap();
        assert!(r.causes.is_empty());
        assert_eq!(r.unmapped.len(), 3);
    }

    #[test]
    fn duplicates_merge_and_clamp() {
        let r = infer_causes(&ranking(&["rotation_x", "rotation_y", "speed", "rotation_z"]), None, 500).unwrap();
        let list = r.cause_list();
        assert_eq!(&list[..2], &[Cause::CameraRotation, Cause::Locomotion]);
        let mut dedup = list.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), list.len());
        assert_eq!(r.causes[0].evidence.len(), 3);
        assert!(r.causes.iter().all(|c| !c.evidence.is_empty()));
        assert!(infer_causes(&ranking(&[]), None, 0).is_err());
    }

    #[test]
    fn constant_gameplay_attributes_are_skipped_with_stats() {
        let mut row = [1.0; ATTRIBUTE_COUNT];
        let a = row;
        row[attribute_index("rotation_z").unwrap()] = 5.0;
        let stats = FrameStats::from_rows([&a, &row]);
        // fov_size is constant, rotation_z varies
        let r = infer_causes(&ranking(&["fov_size", "rotation_z"]), Some(&stats), 2).unwrap();
        assert_eq!(r.cause_list(), vec![Cause::CameraRotation]);
        assert!(r.causes[0].evidence[0].note.contains("sd 2.000"));
    }

    #[test]
    fn mapping_file_round_trip_and_errors() {
        let m = CauseMapping::default();
        assert_eq!(CauseMapping::parse(&m.format()).unwrap(), m);
        assert_eq!(m.cause_of("posture"), Some(Cause::PosturalInstability));
        assert_eq!(m.cause_of("age"), None);
        match CauseMapping::parse("timestamp = Exposure\ntimestmp = Exposure\n") {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("timestamp"), "{message}"),
            other => panic!("{other:?}"),
        }
        assert!(CauseMapping::parse("speed = Warp").is_err());
        assert!(CauseMapping::parse("speed = Locomotion\nspeed = none").is_err());
        let custom = CauseMapping::parse("age = Exposure # override\n").unwrap();
        assert_eq!(custom.cause_of("age"), Some(Cause::Exposure));
        assert_eq!(custom.cause_of("timestamp"), None);
    }
}
