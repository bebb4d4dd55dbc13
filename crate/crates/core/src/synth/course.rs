//! Waypoint courses: the race track (ground plane, y = 0) and the flight
//! corridor (with altitude). Both are polylines with a curvature and a zone
//! id per segment.

use crate::error::{Error, Result};

/// Building block for constructed courses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Straight(f64),
    /// Positive degrees turn left (counter-clockwise in the x-z plane).
    Arc { radius: f64, degrees: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Course {
    /// (x, y, z) waypoints; y is altitude.
    pub waypoints: Vec<[f64; 3]>,
    /// Curvature (1/radius) of the segment leaving each waypoint.
    pub curvature: Vec<f64>,
    /// Zone id of the segment leaving each waypoint; reported as region of interest.
    pub zones: Vec<u32>,
    /// Closed courses wrap around; open ones extend along their last segment.
    pub closed: bool,
    cumulative: Vec<f64>,
}

const STRAIGHT_STEP: f64 = 10.0;
const ARC_STEP_DEG: f64 = 5.0;

impl Course {
    /// Builds a course from explicit waypoints. Segment curvature is the mean
    /// turning angle at the segment's two ends divided by its length.
    pub fn from_waypoints(waypoints: Vec<[f64; 3]>, closed: bool) -> Result<Self> {
        if waypoints.len() < 3 {
            return Err(Error::DegeneratePath(waypoints.len()));
        }
        let n = waypoints.len();
        let seg_count = if closed { n } else { n - 1 };
        let seg = |i: usize| -> ([f64; 2], f64) {
            let a = waypoints[i % n];
            let b = waypoints[(i + 1) % n];
            let d = [b[0] - a[0], b[2] - a[2]];
            (d, d[0].hypot(d[1]))
        };
        let turn = |i: usize, j: usize| -> f64 {
            let (a, la) = seg(i);
            let (b, lb) = seg(j);
            if la == 0.0 || lb == 0.0 {
                return 0.0;
            }
            let cross = a[0] * b[1] - a[1] * b[0];
            let dot = a[0] * b[0] + a[1] * b[1];
            cross.atan2(dot).abs()
        };
        let mut curvature = Vec::with_capacity(seg_count);
        for i in 0..seg_count {
            let (_, len) = seg(i);
            let before = if i > 0 { turn(i - 1, i) } else if closed { turn(seg_count - 1, 0) } else { 0.0 };
            let after = if i + 1 < seg_count { turn(i, i + 1) } else if closed { turn(i, 0) } else { 0.0 };
            curvature.push(if len > 0.0 { (before + after) / 2.0 / len } else { 0.0 });
        }
        let zones = (0..seg_count as u32).collect();
        Ok(Self::assemble(waypoints, curvature, zones, closed))
    }

    fn assemble(waypoints: Vec<[f64; 3]>, curvature: Vec<f64>, zones: Vec<u32>, closed: bool) -> Self {
        let n = waypoints.len();
        let seg_count = curvature.len();
        let mut cumulative = Vec::with_capacity(seg_count + 1);
        cumulative.push(0.0);
        let mut total = 0.0;
        for i in 0..seg_count {
            let a = waypoints[i];
            let b = waypoints[(i + 1) % n];
            total += (b[0] - a[0]).hypot(b[2] - a[2]);
            cumulative.push(total);
        }
        Self { waypoints, curvature, zones, closed, cumulative }
    }

    /// Traces pieces from the origin heading along +x. Each piece is its own zone.
    pub fn from_pieces(pieces: &[Piece], closed: bool) -> Result<Self> {
        let mut points = vec![[0.0f64, 0.0f64]];
        let mut curvature = Vec::new();
        let mut zones = Vec::new();
        let mut heading = 0.0f64;
        let (mut x, mut z) = (0.0f64, 0.0f64);
        for (zone, piece) in pieces.iter().enumerate() {
            match *piece {
                Piece::Straight(len) => {
                    let steps = (len / STRAIGHT_STEP).ceil().max(1.0) as usize;
                    let step = len / steps as f64;
                    for _ in 0..steps {
                        x += step * heading.cos();
                        z += step * heading.sin();
                        points.push([x, z]);
                        curvature.push(0.0);
                        zones.push(zone as u32);
                    }
                }
                Piece::Arc { radius, degrees } => {
                    let steps = (degrees.abs() / ARC_STEP_DEG).ceil().max(1.0) as usize;
                    let delta = degrees.to_radians() / steps as f64;
                    let chord = 2.0 * radius * (delta.abs() / 2.0).sin();
                    for _ in 0..steps {
                        heading += delta / 2.0;
                        x += chord * heading.cos();
                        z += chord * heading.sin();
                        heading += delta / 2.0;
                        points.push([x, z]);
                        curvature.push(1.0 / radius);
                        zones.push(zone as u32);
                    }
                }
            }
        }
        if closed {
            // The last traced point coincides with the origin.
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::DegeneratePath(points.len()));
        }
        let waypoints = points.into_iter().map(|[x, z]| [x, 0.0, z]).collect();
        Ok(Self::assemble(waypoints, curvature, zones, closed))
    }

    /// Race circuit: a rounded rectangle with two tight and two wide corners
    /// and an S-chicane on each long side.
    pub fn race_default() -> Self {
        use Piece::*;
        let chicane = [Arc { radius: 30.0, degrees: 30.0 }, Arc { radius: 30.0, degrees: -60.0 }, Arc { radius: 30.0, degrees: 30.0 }];
        let mut pieces = vec![Straight(120.0)];
        pieces.extend(chicane);
        pieces.extend([Straight(100.0), Arc { radius: 25.0, degrees: 90.0 }, Straight(150.0), Arc { radius: 60.0, degrees: 90.0 }, Straight(120.0)]);
        pieces.extend(chicane);
        pieces.extend([Straight(100.0), Arc { radius: 25.0, degrees: 90.0 }, Straight(150.0), Arc { radius: 60.0, degrees: 90.0 }]);
        Self::from_pieces(&pieces, true).expect("built-in race course is valid")
    }

    /// Flight corridor: a long oval with S-turns on both legs and a rolling
    /// altitude profile between 95 and 145 units.
    pub fn flight_default() -> Self {
        use Piece::*;
        let leg = [
            Straight(300.0),
            Arc { radius: 50.0, degrees: 45.0 },
            Arc { radius: 50.0, degrees: -90.0 },
            Arc { radius: 50.0, degrees: 45.0 },
            Straight(200.0),
            Arc { radius: 150.0, degrees: 180.0 },
        ];
        let pieces: Vec<Piece> = leg.iter().chain(leg.iter()).copied().collect();
        let mut course = Self::from_pieces(&pieces, true).expect("built-in flight course is valid");
        let total = course.length();
        for (i, p) in course.waypoints.iter_mut().enumerate() {
            let s = course.cumulative[i];
            p[1] = 120.0 + 25.0 * (std::f64::consts::TAU * 3.0 * s / total).sin();
        }
        course
    }

    pub fn segment_count(&self) -> usize {
        self.curvature.len()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Distance between the last waypoint and the first one of a closed course.
    pub fn closing_length(&self) -> f64 {
        let a = self.waypoints[self.waypoints.len() - 1];
        let b = self.waypoints[0];
        (b[0] - a[0]).hypot(b[2] - a[2])
    }

    fn segment_at(&self, s: f64) -> (usize, f64) {
        let total = self.length();
        let s = if self.closed { s.rem_euclid(total) } else { s.max(0.0) };
        let last = self.segment_count() - 1;
        if s >= total {
            return (last, s - self.cumulative[last]);
        }
        let i = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).expect("finite arc length")) {
            Ok(i) => i.min(last),
            Err(i) => i - 1,
        };
        (i, s - self.cumulative[i])
    }

    fn endpoints(&self, i: usize) -> ([f64; 3], [f64; 3]) {
        let n = self.waypoints.len();
        (self.waypoints[i], self.waypoints[(i + 1) % n])
    }

    /// Position at arc length `s`.
    pub fn position_at(&self, s: f64) -> [f64; 3] {
        let (i, offset) = self.segment_at(s);
        let (a, b) = self.endpoints(i);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let f = if len > 0.0 { offset / len } else { 0.0 };
        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2])]
    }

    /// Heading in the x-z plane (degrees, counter-clockwise from +x) and
    /// climb angle (degrees) of the segment under `s`.
    pub fn attitude_at(&self, s: f64) -> (f64, f64) {
        let (i, _) = self.segment_at(s);
        let (a, b) = self.endpoints(i);
        let dx = b[0] - a[0];
        let dz = b[2] - a[2];
        let heading = dz.atan2(dx).to_degrees();
        let pitch = (b[1] - a[1]).atan2(dx.hypot(dz)).to_degrees();
        (heading, pitch)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.curvature[self.segment_at(s).0]
    }

    pub fn zone_at(&self, s: f64) -> u32 {
        self.zones[self.segment_at(s).0]
    }

    /// Largest curvature within `[s, s + ahead]`.
    pub fn max_curvature_ahead(&self, s: f64, ahead: f64) -> f64 {
        let (mut i, offset) = self.segment_at(s);
        let mut remaining = ahead + offset;
        let mut best = 0.0f64;
        for _ in 0..self.segment_count() {
            best = best.max(self.curvature[i]);
            remaining -= self.cumulative[i + 1] - self.cumulative[i];
            if remaining <= 0.0 {
                break;
            }
            if i + 1 == self.segment_count() {
                if !self.closed {
                    break;
                }
                i = 0;
            } else {
                i += 1;
            }
        }
        best
    }

    /// Curvature of the segment nearest to the ground-plane point (x, z).
    pub fn nearest_curvature(&self, x: f64, z: f64) -> f64 {
        let n = self.waypoints.len();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.segment_count() {
            let a = self.waypoints[i];
            let b = self.waypoints[(i + 1) % n];
            let (dx, dz) = (b[0] - a[0], b[2] - a[2]);
            let len2 = dx * dx + dz * dz;
            let t = if len2 > 0.0 { (((x - a[0]) * dx + (z - a[2]) * dz) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let (px, pz) = (a[0] + t * dx, a[2] + t * dz);
            let d = (x - px).hypot(z - pz);
            if d < best.0 {
                best = (d, self.curvature[i]);
            }
        }
        best.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_courses_close() {
        for course in [Course::race_default(), Course::flight_default()] {
            assert!(course.closed);
            let mean_seg = course.length() / course.segment_count() as f64;
            assert!(course.closing_length() <= mean_seg * 1.5, "gap {}", course.closing_length());
            assert!(course.curvature.contains(&0.0));
            assert!(course.curvature.iter().any(|&k| k > 0.0));
        }
    }

    #[test]
    fn too_few_waypoints() {
        let err = Course::from_waypoints(vec![[0.0; 3], [1.0, 0.0, 0.0]], false).unwrap_err();
        assert!(matches!(err, Error::DegeneratePath(2)));
    }

    #[test]
    fn straight_course_has_zero_curvature() {
        let c = Course::from_waypoints(vec![[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [200.0, 0.0, 0.0]], false).unwrap();
        assert!(c.curvature.iter().all(|&k| k == 0.0));
        assert_eq!(c.attitude_at(500.0).0, 0.0);
        assert_eq!(c.position_at(250.0)[0], 250.0);
    }

    #[test]
    fn positions_wrap_on_closed_course() {
        let c = Course::race_default();
        let a = c.position_at(10.0);
        let b = c.position_at(10.0 + c.length());
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[2] - b[2]).abs() < 1e-9);
    }

    #[test]
    fn arc_pieces_report_inverse_radius() {
        let c = Course::from_pieces(&[Piece::Straight(20.0), Piece::Arc { radius: 40.0, degrees: 90.0 }, Piece::Straight(20.0)], false).unwrap();
        assert!(c.curvature.iter().any(|&k| (k - 1.0 / 40.0).abs() < 1e-12));
        let end = c.position_at(c.length());
        assert!((end[0] - 60.0).abs() < 1e-9, "{end:?}");
        assert!((end[2] - 60.0).abs() < 1e-9, "{end:?}");
    }
}
