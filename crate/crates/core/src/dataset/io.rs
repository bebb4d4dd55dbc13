use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::model::{
    validate_session, DiscomfortLevel, Eye, Game, GameConfig, Gender, LabelScheme, Phase, Posture,
    SessionRecord, TelemetryFrame, UserProfile, VrsqReport, ATTRIBUTES, ATTRIBUTE_COUNT,
};

use super::{Dataset, FeatureVector};

/// Columns following the 34 attribute columns in the flat CSV. The trailing
/// `timestamp` repeats the frame time; columns are read by position.
pub const CSV_TRAILING_COLUMNS: [&str; 3] = ["label", "session_id", "timestamp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionFormat {
    Jsonl,
    /// Flat feature CSV. The game is not an attribute, so the caller supplies it.
    Csv { game: Game },
}

/// Reads sessions and validates each one; the first violation aborts.
pub fn parse_sessions<R: BufRead>(source: R, format: SessionFormat) -> Result<Vec<SessionRecord>> {
    let sessions = match format {
        SessionFormat::Jsonl => parse_jsonl(source)?,
        SessionFormat::Csv { game } => sessions_from_csv(source, game)?,
    };
    for s in &sessions {
        if let Some(violation) = validate_session(s).into_iter().next() {
            return Err(Error::InvalidSession { session_id: s.session_id.clone(), violation });
        }
    }
    Ok(sessions)
}

fn parse_jsonl<R: BufRead>(source: R) -> Result<Vec<SessionRecord>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SessionRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_sessions_jsonl<W: Write>(sessions: &[SessionRecord], mut out: W) -> Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_header() -> Vec<&'static str> {
    ATTRIBUTES.iter().map(|a| a.name).chain(CSV_TRAILING_COLUMNS).collect()
}

pub fn write_dataset_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(csv_header())?;
    let mut record = Vec::with_capacity(ATTRIBUTE_COUNT + 3);
    for row in &dataset.rows {
        record.clear();
        record.extend(row.values.iter().map(|v| v.to_string()));
        record.push(row.label.to_string());
        record.push(row.session_id.clone());
        record.push(row.frame_timestamp.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

struct CsvRow {
    line: usize,
    values: [f64; ATTRIBUTE_COUNT],
    label: usize,
    session_id: String,
    timestamp: f64,
}

fn read_csv_rows<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(source);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h?,
    };
    let expected = csv_header();
    for (i, name) in header.iter().enumerate() {
        match expected.get(i) {
            Some(&e) if e == name => {}
            Some(&e) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("column {} is `{name}`, expected `{e}`", i + 1),
                })
            }
            None => {
                return Err(Error::Parse { line: 1, message: format!("unknown attribute column `{name}`") })
            }
        }
    }
    if header.len() != expected.len() {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing column `{}`", expected[header.len()]),
        });
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != expected.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, expected {}", record.len(), expected.len()),
            });
        }
        let number = |col: usize| -> Result<f64> {
            let raw = &record[col];
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                line,
                message: format!("`{}` is not a finite number: `{raw}`", expected[col]),
            })
        };
        let mut values = [0.0; ATTRIBUTE_COUNT];
        for (col, slot) in values.iter_mut().enumerate() {
            *slot = number(col)?;
        }
        let label = record[ATTRIBUTE_COUNT].parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("label `{}` is not a class index", &record[ATTRIBUTE_COUNT]),
        })?;
        rows.push(CsvRow {
            line,
            values,
            label,
            session_id: record[ATTRIBUTE_COUNT + 1].to_string(),
            timestamp: number(ATTRIBUTE_COUNT + 2)?,
        });
    }
    Ok(rows)
}

/// Reads the flat CSV straight into a dataset; labels must fit the scheme.
pub fn read_dataset_csv<R: Read>(source: R, scheme: LabelScheme) -> Result<Dataset> {
    let raw = read_csv_rows(source)?;
    let mut provenance: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(raw.len());
    for r in raw {
        if r.label >= scheme.class_count() {
            return Err(Error::Parse {
                line: r.line,
                message: format!("label {} invalid for the {scheme} scheme", r.label),
            });
        }
        if provenance.last() != Some(&r.session_id) && !provenance.contains(&r.session_id) {
            provenance.push(r.session_id.clone());
        }
        rows.push(FeatureVector { values: r.values, label: r.label, session_id: r.session_id, frame_timestamp: r.timestamp });
    }
    let scenario = crate::model::Scenario::C;
    Ok(Dataset { scheme, scenario, rows, provenance })
}

fn int_in(v: f64, max: u32, field: &str, line: usize) -> Result<u32> {
    if v.fract() == 0.0 && v >= 0.0 && v <= f64::from(max) {
        Ok(v as u32)
    } else {
        Err(Error::Parse { line, message: format!("`{field}` value {v} is not an integer in 0..={max}") })
    }
}

fn decode_bool(v: f64, field: &str, line: usize) -> Result<bool> {
    Ok(int_in(v, 1, field, line)? == 1)
}

/// Rebuilds sessions from flat rows: context columns must be constant within
/// a session and every frame carries its label as the reported level.
fn sessions_from_csv<R: Read>(source: R, game: Game) -> Result<Vec<SessionRecord>> {
    let rows = read_csv_rows(source)?;
    let mut sessions: Vec<SessionRecord> = Vec::new();
    let mut context: Vec<[f64; ATTRIBUTE_COUNT]> = Vec::new();
    for r in rows {
        let v = &r.values;
        let level = u8::try_from(r.label)
            .ok()
            .and_then(|l| DiscomfortLevel::try_from(l).ok())
            .ok_or_else(|| Error::Parse { line: r.line, message: format!("label {} outside 0..=3", r.label) })?;
        let frame = TelemetryFrame {
            timestamp: v[17],
            speed: v[18],
            acceleration: v[19],
            rotation_x: v[20],
            rotation_y: v[21],
            rotation_z: v[22],
            position_x: v[23],
            position_y: v[24],
            position_z: v[25],
            region_of_interest: int_in(v[26], u32::MAX, "region_of_interest", r.line)?,
            fov_size: v[27],
            frame_rate: v[28],
            reported_discomfort: Some(level),
        };
        if frame.timestamp != r.timestamp {
            return Err(Error::Parse { line: r.line, message: "trailing timestamp differs from the timestamp attribute".into() });
        }
        if let Some(pos) = sessions.iter().position(|s| s.session_id == r.session_id) {
            let same_context = context[pos][..17] == v[..17] && context[pos][29..] == v[29..];
            if !same_context {
                return Err(Error::Parse {
                    line: r.line,
                    message: format!("session `{}` changes profile, questionnaire or config values", r.session_id),
                });
            }
            sessions[pos].frames.push(frame);
            continue;
        }
        let l = r.line;
        let gender = match int_in(v[0], 2, "gender", l)? {
            0 => Gender::Female,
            1 => Gender::Male,
            _ => Gender::Other,
        };
        let profile = UserProfile {
            gender,
            age: int_in(v[1], u32::MAX, "age", l)?,
            vr_experience: int_in(v[2], 3, "vr_experience", l)? as u8,
            flicker_sensitivity: decode_bool(v[3], "flicker_sensitivity", l)?,
            pre_symptoms: decode_bool(v[4], "pre_symptoms", l)?,
            wears_glasses: decode_bool(v[5], "wears_glasses", l)?,
            vision_impairment: decode_bool(v[6], "vision_impairment", l)?,
            posture: if decode_bool(v[7], "posture", l)? { Posture::Standing } else { Posture::Sitting },
            dominant_eye: if decode_bool(v[8], "dominant_eye", l)? { Eye::Right } else { Eye::Left },
        };
        let mut scores = [0u8; 8];
        for (i, s) in scores.iter_mut().enumerate() {
            *s = int_in(v[9 + i], 3, ATTRIBUTES[9 + i].name, l)? as u8;
        }
        let config = GameConfig {
            static_rest_frame: decode_bool(v[29], "static_rest_frame", l)?,
            haptic_feedback: decode_bool(v[30], "haptic_feedback", l)?,
            camera_control_level: int_in(v[31], 2, "camera_control_level", l)? as u8,
            dof_simulation: decode_bool(v[32], "dof_simulation", l)?,
            auto_camera: decode_bool(v[33], "auto_camera", l)?,
        };
        context.push(*v);
        sessions.push(SessionRecord {
            session_id: r.session_id,
            game,
            profile,
            pre_questionnaire: VrsqReport::from_scores(Phase::Pre, scores),
            post_questionnaire: None,
            config,
            frames: vec![frame],
        });
    }
    Ok(sessions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::assemble_features;
    use crate::model::sample_session;

    fn jsonl_of(sessions: &[SessionRecord]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_sessions_jsonl(sessions, &mut buf).unwrap();
        buf
    }

    #[test]
    fn empty_stream_is_empty_list() {
        assert!(parse_sessions(&b""[..], SessionFormat::Jsonl).unwrap().is_empty());
        assert!(parse_sessions(&b""[..], SessionFormat::Csv { game: Game::Race }).unwrap().is_empty());
    }

    #[test]
    fn jsonl_round_trip() {
        let s = sample_session();
        let parsed = parse_sessions(&jsonl_of(std::slice::from_ref(&s))[..], SessionFormat::Jsonl).unwrap();
        assert_eq!(parsed, vec![s]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut buf = jsonl_of(&[sample_session()]);
        buf.extend_from_slice(b"{not json}\n");
        match parse_sessions(&buf[..], SessionFormat::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_frame_rate_names_field() {
        let mut s = sample_session();
        s.frames[1].frame_rate = -90.0;
        let err = parse_sessions(&jsonl_of(&[s])[..], SessionFormat::Jsonl).unwrap_err();
        match &err {
            Error::InvalidSession { session_id, violation } => {
                assert_eq!(session_id, "s1");
                assert_eq!(violation.field, "frame_rate");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("frame_rate"));
    }

    #[test]
    fn unknown_json_fields_rejected() {
        let line = String::from_utf8(jsonl_of(&[sample_session()])).unwrap();
        let tampered = line.replacen("\"speed\"", "\"velocity\"", 1);
        assert!(matches!(parse_sessions(tampered.as_bytes(), SessionFormat::Jsonl), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_round_trip_through_sessions() {
        let s = sample_session();
        let d = assemble_features(std::slice::from_ref(&s), LabelScheme::Quarterly).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&d, &mut buf).unwrap();
        let back = parse_sessions(&buf[..], SessionFormat::Csv { game: Game::Race }).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].profile, s.profile);
        assert_eq!(back[0].config, s.config);
        assert_eq!(back[0].frames.len(), 2);
        let d2 = assemble_features(&back, LabelScheme::Quarterly).unwrap();
        assert_eq!(d2.rows, d.rows);
        let direct = read_dataset_csv(&buf[..], LabelScheme::Quarterly).unwrap();
        assert_eq!(direct.rows, d.rows);
    }

    #[test]
    fn csv_rejects_unknown_columns() {
        let d = assemble_features(&[sample_session()], LabelScheme::Binary).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let renamed = text.replacen("speed", "velocity", 1);
        let err = read_dataset_csv(renamed.as_bytes(), LabelScheme::Binary).unwrap_err();
        assert!(err.to_string().contains("velocity"));
        let widened = text.replacen(",timestamp\n", ",timestamp,extra\n", 1);
        let err = read_dataset_csv(widened.as_bytes(), LabelScheme::Binary).unwrap_err();
        assert!(err.to_string().contains("unknown attribute column `extra`"));
    }

    #[test]
    fn csv_header_layout() {
        let h = csv_header();
        assert_eq!(h.len(), 37);
        assert_eq!(&h[34..], &["label", "session_id", "timestamp"]);
    }
}
