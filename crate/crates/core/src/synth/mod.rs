//! Seeded race and flight session simulator with a planted discomfort-risk
//! model.
//!
//! Per-frame latent risk grows with elapsed time, heading-rotation rate,
//! acceleration magnitude and a susceptibility score of the player profile.
//! Thresholding the risk gives the latent discomfort level; a seeded subset
//! of frames voices it as a report. Because the risk is recomputable from the
//! stored frames, every generated session doubles as its own oracle.
//!
//! Kinematic defaults: race top speed 32 units/s, lateral grip 6 units/s²,
//! throttle 4 and brakes 7 units/s²; flight top speed 45 units/s, grip
//! 9 units/s². Risk saturates at a heading rate of 30 deg/s and an
//! acceleration magnitude of 6 units/s².

mod course;

pub use course::{Course, Piece};

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DiscomfortLevel, Eye, Game, GameConfig, Gender, Phase, Posture, SessionRecord, TelemetryFrame,
    UserProfile, VrsqReport,
};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskWeights {
    pub time: f64,
    pub rotation: f64,
    pub acceleration: f64,
    pub profile: f64,
}

impl RiskWeights {
    pub const fn new(time: f64, rotation: f64, acceleration: f64, profile: f64) -> Self {
        Self { time, rotation, acceleration, profile }
    }

    fn sum(&self) -> f64 {
        self.time + self.rotation + self.acceleration + self.profile
    }
}

impl Default for RiskWeights {
    fn default() -> Self {
        Self::new(0.4, 0.3, 0.2, 0.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Reference session length; elapsed-time risk is `t / duration_s`.
    pub duration_s: f64,
    pub frame_interval_s: f64,
    pub track: Course,
    pub corridor: Course,
    pub risk_weights: RiskWeights,
    pub thresholds: [f64; 3],
    /// Probability that a frame voices its latent level. The first frame always does.
    pub report_prob: f64,
    /// Heading rate (deg/s) at which the rotation term saturates.
    pub omega_ref: f64,
    /// Acceleration magnitude (units/s²) at which the acceleration term saturates.
    pub accel_ref: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            frame_interval_s: 1.0,
            track: Course::race_default(),
            corridor: Course::flight_default(),
            risk_weights: RiskWeights::default(),
            thresholds: [0.3, 0.55, 0.75],
            report_prob: 0.1,
            omega_ref: 12.0,
            accel_ref: 6.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let w = &self.risk_weights;
        if [w.time, w.rotation, w.acceleration, w.profile].iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter("risk weights must be non-negative".into()));
        }
        if (w.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("risk weights sum to {}, expected 1", w.sum())));
        }
        let [a, b, c] = self.thresholds;
        if !(0.0 < a && a < b && b < c && c < 1.0) {
            return Err(Error::InvalidParameter("thresholds must increase strictly inside (0, 1)".into()));
        }
        if !(self.duration_s > 0.0) || !(self.frame_interval_s > 0.0) {
            return Err(Error::InvalidParameter("duration and frame interval must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.report_prob) {
            return Err(Error::InvalidParameter("report_prob must lie in [0, 1]".into()));
        }
        if !(self.omega_ref > 0.0) || !(self.accel_ref > 0.0) {
            return Err(Error::InvalidParameter("omega_ref and accel_ref must be positive".into()));
        }
        Ok(())
    }

    pub fn course(&self, game: Game) -> &Course {
        match game {
            Game::Race => &self.track,
            Game::Flight => &self.corridor,
        }
    }
}

/// Susceptibility in [0, 1]: mean of pre-existing symptoms, flicker
/// sensitivity and inexperience (3 - vr_experience) / 3.
pub fn profile_score(profile: &UserProfile) -> f64 {
    let inexperience = f64::from(3 - profile.vr_experience.min(3)) / 3.0;
    (f64::from(u8::from(profile.pre_symptoms)) + f64::from(u8::from(profile.flicker_sensitivity)) + inexperience) / 3.0
}

/// Latent discomfort risk in [0, 1].
pub fn risk_score(timestamp: f64, rotation_rate_z: f64, acceleration: f64, profile: &UserProfile, params: &SimParams) -> f64 {
    risk_from_parts(timestamp, rotation_rate_z, acceleration, profile_score(profile), params)
}

pub fn risk_from_parts(timestamp: f64, rotation_rate_z: f64, acceleration: f64, profile_score: f64, params: &SimParams) -> f64 {
    let w = &params.risk_weights;
    let r = w.time * (timestamp / params.duration_s)
        + w.rotation * (rotation_rate_z.abs() / params.omega_ref).min(1.0)
        + w.acceleration * (acceleration.abs() / params.accel_ref).min(1.0)
        + w.profile * profile_score;
    r.clamp(0.0, 1.0)
}

pub fn level_for_risk(r: f64, thresholds: &[f64; 3]) -> DiscomfortLevel {
    if r < thresholds[0] {
        DiscomfortLevel::None
    } else if r < thresholds[1] {
        DiscomfortLevel::Slight
    } else if r < thresholds[2] {
        DiscomfortLevel::Moderate
    } else {
        DiscomfortLevel::Severe
    }
}

/// Heading-rotation rate per frame (deg/s) from stored `rotation_z` values,
/// using the shortest signed angle between consecutive frames. Frame 0 is 0.
pub fn rotation_rates(frames: &[TelemetryFrame]) -> Vec<f64> {
    let mut out = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        if i == 0 {
            out.push(0.0);
            continue;
        }
        let prev = &frames[i - 1];
        let delta = (f.rotation_z - prev.rotation_z + 540.0).rem_euclid(360.0) - 180.0;
        out.push(delta / (f.timestamp - prev.timestamp));
    }
    out
}

/// Latent per-frame risk and level of one generated session.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTrace {
    pub timestamps: Vec<f64>,
    pub risk: Vec<f64>,
    pub levels: Vec<DiscomfortLevel>,
}

pub fn write_risk_trace_csv<W: Write>(session_id: &str, trace: &RiskTrace, out: &mut W) -> Result<()> {
    for ((t, r), l) in trace.timestamps.iter().zip(&trace.risk).zip(&trace.levels) {
        writeln!(out, "{session_id},{t},{r},{}", l.value())?;
    }
    Ok(())
}

pub const RISK_TRACE_HEADER: &str = "session_id,timestamp,r,latent_level";

fn wrap_degrees(d: f64) -> f64 {
    let w = d.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

struct Vehicle {
    top_speed: f64,
    grip: f64,
    throttle: f64,
    brake: f64,
    start_speed: f64,
}

fn vehicle(game: Game, skill: f64) -> Vehicle {
    match game {
        Game::Race => Vehicle { top_speed: 32.0 * skill, grip: 6.0 * skill, throttle: 4.0, brake: 7.0, start_speed: 0.0 },
        Game::Flight => Vehicle { top_speed: 45.0 * skill, grip: 9.0 * skill, throttle: 3.0, brake: 5.0, start_speed: 30.0 },
    }
}

fn target_speed(course: &Course, s: f64, v: f64, car: &Vehicle) -> f64 {
    let ahead = v * v / (2.0 * car.brake) + 5.0;
    let k = course.max_curvature_ahead(s, ahead);
    if k > 0.0 {
        car.top_speed.min((car.grip / k).sqrt())
    } else {
        car.top_speed
    }
}

/// Simulates `frames` frames spaced `interval` seconds apart.
fn simulate(
    game: Game,
    seed: u64,
    profile: &UserProfile,
    config: &GameConfig,
    params: &SimParams,
    frames: usize,
    interval: f64,
) -> Result<(SessionRecord, RiskTrace)> {
    params.validate()?;
    let course = params.course(game);
    if course.waypoints.len() < 3 {
        return Err(Error::DegeneratePath(course.waypoints.len()));
    }
    let mut rng = seed::rng(seed);
    let skill = rng.gen_range(0.8..1.15);
    let car = vehicle(game, skill);
    let fov_size = [90.0, 100.0, 110.0][rng.gen_range(0..3)];
    let mut s = rng.gen_range(0.0..course.length());
    let mut v = car.start_speed;
    let mut head_yaw = 0.0f64;
    let mut head_pitch = 0.0f64;

    let substeps = (interval / 0.05).ceil().max(1.0) as usize;
    let h = interval / substeps as f64;

    let mut out = Vec::with_capacity(frames);
    let mut previous_speed = v;
    for i in 0..frames {
        if i > 0 {
            for _ in 0..substeps {
                let target = target_speed(course, s, v, &car);
                let dv = (target - v).clamp(-car.brake * h, car.throttle * h);
                v = (v + dv).max(0.0);
                s += v * h;
            }
        }
        let timestamp = i as f64 * interval;
        let acceleration = if i == 0 { 0.0 } else { (v - previous_speed) / interval };
        previous_speed = v;

        let pos = course.position_at(s);
        let (heading, pitch) = course.attitude_at(s);
        head_yaw = 0.8 * head_yaw + rng.gen_range(-3.0..3.0);
        head_pitch = 0.8 * head_pitch + rng.gen_range(-1.5..1.5);
        let rotation_x = match game {
            Game::Race => wrap_degrees(head_pitch),
            Game::Flight => wrap_degrees(pitch),
        };
        let frame_rate = if rng.gen_bool(0.9) { 90.0 } else { f64::from(rng.gen_range(60u32..90)) };
        out.push(TelemetryFrame {
            timestamp,
            speed: v,
            acceleration,
            rotation_x,
            rotation_y: wrap_degrees(head_yaw),
            rotation_z: wrap_degrees(heading),
            position_x: pos[0],
            position_y: pos[1],
            position_z: pos[2],
            region_of_interest: course.zone_at(s),
            fov_size,
            frame_rate,
            reported_discomfort: None,
        });
    }

    let susceptibility = profile_score(profile);
    let rates = rotation_rates(&out);
    let mut trace = RiskTrace { timestamps: Vec::with_capacity(frames), risk: Vec::with_capacity(frames), levels: Vec::with_capacity(frames) };
    for (i, frame) in out.iter_mut().enumerate() {
        let r = risk_from_parts(frame.timestamp, rates[i], frame.acceleration, susceptibility, params);
        let level = level_for_risk(r, &params.thresholds);
        if i == 0 || rng.gen_bool(params.report_prob) {
            frame.reported_discomfort = Some(level);
        }
        trace.timestamps.push(frame.timestamp);
        trace.risk.push(r);
        trace.levels.push(level);
    }

    let peak = trace.levels.iter().copied().max().unwrap_or(DiscomfortLevel::None).value();
    let pre = pre_questionnaire(profile, &mut rng);
    let post_scores = pre.items.iter().map(|item| {
        let bump = if rng.gen_bool(0.5) { peak } else { peak.saturating_sub(1) };
        (item.score + bump).min(3)
    });
    let mut post_array = [0u8; 8];
    for (slot, score) in post_array.iter_mut().zip(post_scores) {
        *slot = score;
    }

    let session = SessionRecord {
        session_id: format!("{}-{:016x}", game.as_str(), seed),
        game,
        profile: profile.clone(),
        pre_questionnaire: pre,
        post_questionnaire: Some(VrsqReport::from_scores(Phase::Post, post_array)),
        config: config.clone(),
        frames: out,
    };
    Ok((session, trace))
}

fn pre_questionnaire(profile: &UserProfile, rng: &mut ChaCha8Rng) -> VrsqReport {
    let mut scores = [0u8; 8];
    for s in &mut scores {
        let u: f64 = rng.gen();
        *s = if profile.pre_symptoms {
            if u < 0.4 { 0 } else if u < 0.8 { 1 } else { 2 }
        } else if u < 0.85 {
            0
        } else {
            1
        };
    }
    VrsqReport::from_scores(Phase::Pre, scores)
}

/// One session of `duration_s / frame_interval_s + 1` frames starting at t = 0.
pub fn generate_session(
    game: Game,
    seed: u64,
    profile: &UserProfile,
    config: &GameConfig,
    params: &SimParams,
) -> Result<(SessionRecord, RiskTrace)> {
    params.validate()?;
    let frames = (params.duration_s / params.frame_interval_s).floor() as usize + 1;
    simulate(game, seed, profile, config, params, frames, params.frame_interval_s)
}

/// Session counts and total frame targets per game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub race_sessions: usize,
    pub flight_sessions: usize,
    pub race_rows: usize,
    pub flight_rows: usize,
}

impl CorpusSpec {
    /// 15 race and 22 flight players with 3993 and 5397 frames.
    pub fn study_scale() -> Self {
        Self { race_sessions: 15, flight_sessions: 22, race_rows: 3993, flight_rows: 5397 }
    }

    /// Sessions per game with a default of 266 frames each.
    pub fn from_counts(race_sessions: usize, flight_sessions: usize) -> Self {
        Self { race_sessions, flight_sessions, race_rows: race_sessions * 266, flight_rows: flight_sessions * 245 }
    }
}

/// Documented player distribution: gender female 25%, male 73%, other 2%;
/// age uniform 18..=60; experience uniform 0..=3; flicker sensitivity 20%;
/// pre-existing symptoms 30%; glasses 35%; vision impairment 20%; sitting
/// 70%; right dominant eye 70%.
pub fn sample_profile(rng: &mut ChaCha8Rng) -> UserProfile {
    let g: f64 = rng.gen();
    UserProfile {
        gender: if g < 0.25 { Gender::Female } else if g < 0.98 { Gender::Male } else { Gender::Other },
        age: rng.gen_range(18..=60),
        vr_experience: rng.gen_range(0..=3),
        flicker_sensitivity: rng.gen_bool(0.2),
        pre_symptoms: rng.gen_bool(0.3),
        wears_glasses: rng.gen_bool(0.35),
        vision_impairment: rng.gen_bool(0.2),
        posture: if rng.gen_bool(0.7) { Posture::Sitting } else { Posture::Standing },
        dominant_eye: if rng.gen_bool(0.7) { Eye::Right } else { Eye::Left },
    }
}

/// Each switch on with probability 0.5, camera control uniform over 0..=2,
/// automatic camera only offered below full control.
pub fn sample_config(rng: &mut ChaCha8Rng) -> GameConfig {
    let camera_control_level = rng.gen_range(0..=2);
    GameConfig {
        static_rest_frame: rng.gen_bool(0.5),
        haptic_feedback: rng.gen_bool(0.5),
        camera_control_level,
        dof_simulation: rng.gen_bool(0.5),
        auto_camera: camera_control_level < 2 && rng.gen_bool(0.5),
    }
}

/// Frame count of each of `sessions` sessions so the total equals `rows`.
fn split_rows(rows: usize, sessions: usize) -> Vec<usize> {
    (0..sessions).map(|i| rows / sessions + usize::from(i < rows % sessions)).collect()
}

/// A full corpus with its latent traces. Sessions are generated in parallel
/// from per-session derived seeds, so output does not depend on scheduling.
pub fn generate_corpus_with_traces(spec: &CorpusSpec, seed: u64, params: &SimParams) -> Result<Vec<(SessionRecord, RiskTrace)>> {
    params.validate()?;
    if spec.race_sessions + spec.flight_sessions == 0 {
        return Err(Error::InvalidParameter("corpus needs at least one session".into()));
    }
    let mut jobs = Vec::new();
    for (game, sessions, rows) in [(Game::Race, spec.race_sessions, spec.race_rows), (Game::Flight, spec.flight_sessions, spec.flight_rows)] {
        for (i, frames) in split_rows(rows, sessions).into_iter().enumerate() {
            jobs.push((game, i, frames.max(2)));
        }
    }
    jobs.par_iter()
        .map(|&(game, i, frames)| {
            let session_seed = seed::derive(seed, &[game.as_str(), &i.to_string()]);
            let mut rng = seed::rng(seed::derive(session_seed, &["player"]));
            let profile = sample_profile(&mut rng);
            let config = sample_config(&mut rng);
            // Players may stop early; sessions last 55% to 100% of the reference length.
            let length = params.duration_s * rng.gen_range(0.55..=1.0);
            let interval = length / (frames - 1) as f64;
            let (mut session, trace) = simulate(game, session_seed, &profile, &config, params, frames, interval)?;
            session.session_id = format!("{}-{:03}", game.as_str(), i);
            Ok((session, trace))
        })
        .collect()
}

pub fn generate_corpus(spec: &CorpusSpec, seed: u64, params: &SimParams) -> Result<Vec<SessionRecord>> {
    Ok(generate_corpus_with_traces(spec, seed, params)?.into_iter().map(|(s, _)| s).collect())
}
