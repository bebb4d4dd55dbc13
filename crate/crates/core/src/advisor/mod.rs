//! Causes x strategies knowledge base and mitigation suggestions.

mod mapping;

pub use mapping::{infer_causes, CauseEvidence, CauseMapping, Evidence, FrameStats, InferredCauses, DEFAULT_MAPPING};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cause {
    Locomotion = 1,
    Acceleration = 2,
    FieldOfView = 3,
    DepthOfField = 4,
    DegreeOfControl = 5,
    Exposure = 6,
    Latency = 7,
    StaticRestFrame = 8,
    CameraRotation = 9,
    PosturalInstability = 10,
}

impl Cause {
    pub const ALL: [Cause; 10] = [
        Cause::Locomotion,
        Cause::Acceleration,
        Cause::FieldOfView,
        Cause::DepthOfField,
        Cause::DegreeOfControl,
        Cause::Exposure,
        Cause::Latency,
        Cause::StaticRestFrame,
        Cause::CameraRotation,
        Cause::PosturalInstability,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Cause> {
        Cause::ALL.get(usize::from(id).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Cause::Locomotion => "Locomotion",
            Cause::Acceleration => "Acceleration",
            Cause::FieldOfView => "FieldOfView",
            Cause::DepthOfField => "DepthOfField",
            Cause::DegreeOfControl => "DegreeOfControl",
            Cause::Exposure => "Exposure",
            Cause::Latency => "Latency",
            Cause::StaticRestFrame => "StaticRestFrame",
            Cause::CameraRotation => "CameraRotation",
            Cause::PosturalInstability => "PosturalInstability",
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Cause {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Cause::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown cause `{s}`")))
    }
}

/// In knowledge-base row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    Teleporting,
    Tunneling,
    MotionWalk,
    HapticFeedback,
    AccelerationChanges,
    Headlock,
    Holosphere,
    TrajectoryVisualization,
    RotationalBlur,
    DoFSimulation,
    LatencyCameraWarping,
    CabinStaticFrame,
    Slowmotion,
    DynamicFoV,
    DynamicVignetting,
    AmplifiedMovements,
    Blur,
    Interval,
    PhysiologicalSignalsObservation,
}

impl Strategy {
    pub const ALL: [Strategy; 19] = [
        Strategy::Teleporting,
        Strategy::Tunneling,
        Strategy::MotionWalk,
        Strategy::HapticFeedback,
        Strategy::AccelerationChanges,
        Strategy::Headlock,
        Strategy::Holosphere,
        Strategy::TrajectoryVisualization,
        Strategy::RotationalBlur,
        Strategy::DoFSimulation,
        Strategy::LatencyCameraWarping,
        Strategy::CabinStaticFrame,
        Strategy::Slowmotion,
        Strategy::DynamicFoV,
        Strategy::DynamicVignetting,
        Strategy::AmplifiedMovements,
        Strategy::Blur,
        Strategy::Interval,
        Strategy::PhysiologicalSignalsObservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Teleporting => "Teleporting",
            Strategy::Tunneling => "Tunneling",
            Strategy::MotionWalk => "MotionWalk",
            Strategy::HapticFeedback => "HapticFeedback",
            Strategy::AccelerationChanges => "AccelerationChanges",
            Strategy::Headlock => "Headlock",
            Strategy::Holosphere => "Holosphere",
            Strategy::TrajectoryVisualization => "TrajectoryVisualization",
            Strategy::RotationalBlur => "RotationalBlur",
            Strategy::DoFSimulation => "DoFSimulation",
            Strategy::LatencyCameraWarping => "LatencyCameraWarping",
            Strategy::CabinStaticFrame => "CabinStaticFrame",
            Strategy::Slowmotion => "Slowmotion",
            Strategy::DynamicFoV => "DynamicFoV",
            Strategy::DynamicVignetting => "DynamicVignetting",
            Strategy::AmplifiedMovements => "AmplifiedMovements",
            Strategy::Blur => "Blur",
            Strategy::Interval => "Interval",
            Strategy::PhysiologicalSignalsObservation => "PhysiologicalSignalsObservation",
        }
    }

    fn row(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `cells[strategy][cause id - 1]` is true when the strategy addresses the cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseStrategyMatrix {
    cells: [[bool; 10]; 19],
}

impl CauseStrategyMatrix {
    pub fn cell(&self, strategy: Strategy, cause: Cause) -> bool {
        self.cells[strategy.row()][usize::from(cause.id() - 1)]
    }

    pub fn true_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }

    /// Strategies addressing `cause`, in row order.
    pub fn strategies_for(&self, cause: Cause) -> Vec<Strategy> {
        Strategy::ALL.into_iter().filter(|&s| self.cell(s, cause)).collect()
    }

    pub fn causes_for(&self, strategy: Strategy) -> Vec<Cause> {
        Cause::ALL.into_iter().filter(|&c| self.cell(strategy, c)).collect()
    }

    /// `strategy,<cause names...>` header, then one 0/1 row per strategy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy");
        for c in Cause::ALL {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for s in Strategy::ALL {
            out.push_str(s.name());
            for c in Cause::ALL {
                out.push_str(if self.cell(s, c) { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Cause ids addressed by each strategy, in row order.
const TABLE: [(Strategy, &[u8]); 19] = [
    (Strategy::Teleporting, &[1]),
    (Strategy::Tunneling, &[1]),
    (Strategy::MotionWalk, &[1]),
    (Strategy::HapticFeedback, &[2]),
    (Strategy::AccelerationChanges, &[2]),
    (Strategy::Headlock, &[5]),
    (Strategy::Holosphere, &[1]),
    (Strategy::TrajectoryVisualization, &[1]),
    (Strategy::RotationalBlur, &[1, 9]),
    (Strategy::DoFSimulation, &[4]),
    (Strategy::LatencyCameraWarping, &[7]),
    (Strategy::CabinStaticFrame, &[8]),
    (Strategy::Slowmotion, &[2, 9]),
    (Strategy::DynamicFoV, &[3]),
    (Strategy::DynamicVignetting, &[1, 3]),
    (Strategy::AmplifiedMovements, &[9]),
    (Strategy::Blur, &[1, 2, 3, 4, 9]),
    (Strategy::Interval, &[6]),
    (Strategy::PhysiologicalSignalsObservation, &[10]),
];

pub fn builtin_matrix() -> CauseStrategyMatrix {
    let mut cells = [[false; 10]; 19];
    for (strategy, causes) in TABLE {
        for &id in causes {
            cells[strategy.row()][usize::from(id - 1)] = true;
        }
    }
    CauseStrategyMatrix { cells }
}

pub fn strategies_for(cause: Cause) -> Vec<Strategy> {
    builtin_matrix().strategies_for(cause)
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub cause: Cause,
    pub strategies: Vec<Strategy>,
    pub evidence: Vec<Evidence>,
}

/// Probability of any discomfort: 1 − P(class 0), for binary and quarterly alike.
pub fn discomfort_probability(probs: &[f64]) -> f64 {
    1.0 - probs.first().copied().unwrap_or(1.0)
}

/// One suggestion per cause when the discomfort probability exceeds `threshold`.
pub fn advise(probs: &[f64], causes: &[Cause], threshold: f64) -> Vec<Suggestion> {
    let with_evidence: Vec<CauseEvidence> = causes.iter().map(|&cause| CauseEvidence { cause, evidence: Vec::new() }).collect();
    advise_with_evidence(probs, &with_evidence, threshold)
}

pub fn advise_with_evidence(probs: &[f64], causes: &[CauseEvidence], threshold: f64) -> Vec<Suggestion> {
    if discomfort_probability(probs) <= threshold {
        return Vec::new();
    }
    let matrix = builtin_matrix();
    causes
        .iter()
        .map(|c| Suggestion { cause: c.cause, strategies: matrix.strategies_for(c.cause), evidence: c.evidence.clone() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Strategy::*;

    /// Column-wise reading of the table, written independently of `TABLE`.
    fn column_oracle(cause: Cause) -> Vec<Strategy> {
        match cause {
            Cause::Locomotion => vec![Teleporting, Tunneling, MotionWalk, Holosphere, TrajectoryVisualization, RotationalBlur, DynamicVignetting, Blur],
            Cause::Acceleration => vec![HapticFeedback, AccelerationChanges, Slowmotion, Blur],
            Cause::FieldOfView => vec![DynamicFoV, DynamicVignetting, Blur],
            Cause::DepthOfField => vec![DoFSimulation, Blur],
            Cause::DegreeOfControl => vec![Headlock],
            Cause::Exposure => vec![Interval],
            Cause::Latency => vec![LatencyCameraWarping],
            Cause::StaticRestFrame => vec![CabinStaticFrame],
            Cause::CameraRotation => vec![RotationalBlur, Slowmotion, AmplifiedMovements, Blur],
            Cause::PosturalInstability => vec![PhysiologicalSignalsObservation],
        }
    }

    #[test]
    fn matrix_matches_column_reading() {
        let m = builtin_matrix();
        for c in Cause::ALL {
            assert_eq!(m.strategies_for(c), column_oracle(c), "{c}");
        }
        assert_eq!(m.true_cells(), 26);
        assert!(m.cell(Blur, Cause::CameraRotation));
        assert_eq!(m.causes_for(Interval), vec![Cause::Exposure]);
        for s in Strategy::ALL {
            assert!(!m.causes_for(s).is_empty(), "{s}");
        }
    }

    #[test]
    fn ids_and_names_are_bijective() {
        for (i, c) in Cause::ALL.into_iter().enumerate() {
            assert_eq!(usize::from(c.id()), i + 1);
            assert_eq!(Cause::from_id(c.id()), Some(c));
            assert_eq!(c.name().parse::<Cause>().unwrap(), c);
        }
        assert_eq!(Cause::from_id(0), None);
        assert_eq!(Cause::from_id(11), None);
        assert_eq!(serde_json::to_string(&Cause::FieldOfView).unwrap(), "\"FieldOfView\"");
    }

    #[test]
    fn advise_examples() {
        assert!(advise(&[0.9, 0.1], &[Cause::Exposure], 0.5).is_empty());
        let s = advise(&[0.2, 0.8], &[Cause::Exposure], 0.5);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].strategies, vec![Interval]);
        let s = advise(&[0.1, 0.2, 0.3, 0.4], &[Cause::CameraRotation], DEFAULT_THRESHOLD);
        assert_eq!(s[0].strategies, vec![RotationalBlur, Slowmotion, AmplifiedMovements, Blur]);
        // exactly at the threshold is not above it
        assert!(advise(&[0.5, 0.5], &[Cause::Exposure], 0.5).is_empty());
    }

    #[test]
    fn advise_is_monotone_in_threshold() {
        let probs = [0.3, 0.7];
        let causes = Cause::ALL;
        let mut last = usize::MAX;
        for t in [0.0, 0.2, 0.5, 0.69, 0.7, 0.9, 1.0] {
            let n = advise(&probs, &causes, t).len();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn csv_export_shape() {
        let csv = builtin_matrix().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 20);
        assert!(lines[0].starts_with("strategy,Locomotion,Acceleration"));
        assert_eq!(lines[10], "DoFSimulation,0,0,0,1,0,0,0,0,0,0");
    }
}
