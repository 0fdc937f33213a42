//! Annotation and detection record files.
//!
//! One box per line, whitespace-separated:
//!
//! ```text
//! <frame_id> <category> <x> <y> <z> <width> <length> <height> <yaw> [<score>]
//! ```
//!
//! Positions and extents are meters, yaw is radians, all at six decimals.
//! The trailing score only exists on detector output; ground-truth readers
//! tolerate and ignore it, detection readers require it. Blank lines and
//! `#` comments are skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::geom::{Category, Detection, ObjectAnnotation};

use super::IoError;

struct ParsedRecord {
    frame_id: String,
    annotation: ObjectAnnotation,
    score: Option<f64>,
}

fn parse_record(path: &Path, line_no: usize, line: &str) -> Result<ParsedRecord, IoError> {
    let line_err = |detail: String| IoError::MalformedLine {
        path: path.to_path_buf(),
        line: line_no,
        detail,
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 9 && fields.len() != 10 {
        return Err(line_err(format!(
            "expected 9 or 10 fields, got {}",
            fields.len()
        )));
    }
    let category = Category::parse(fields[1]).ok_or_else(|| IoError::UnknownCategory {
        path: path.to_path_buf(),
        line: line_no,
        name: fields[1].to_string(),
    })?;
    let mut numbers = [0.0f64; 7];
    for (slot, token) in numbers.iter_mut().zip(&fields[2..9]) {
        *slot = token
            .parse()
            .map_err(|_| line_err(format!("bad number {token:?}")))?;
    }
    let [x, y, z, width, length, height, yaw] = numbers;
    let annotation = ObjectAnnotation::new(category, x, y, z, width, length, height, yaw)
        .map_err(|e| line_err(e.to_string()))?;
    let score = match fields.get(9) {
        None => None,
        Some(token) => Some(
            token
                .parse()
                .map_err(|_| line_err(format!("bad score {token:?}")))?,
        ),
    };
    Ok(ParsedRecord { frame_id: fields[0].to_string(), annotation, score })
}

fn read_records(path: &Path) -> Result<Vec<(usize, ParsedRecord)>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        records.push((i + 1, parse_record(path, i + 1, line)?));
    }
    Ok(records)
}

/// Reads ground-truth boxes grouped by frame id. Scores, if present, are
/// ignored.
pub fn read_ground_truth(
    path: &Path,
) -> Result<BTreeMap<String, Vec<ObjectAnnotation>>, IoError> {
    let mut frames: BTreeMap<String, Vec<ObjectAnnotation>> = BTreeMap::new();
    for (_, record) in read_records(path)? {
        frames.entry(record.frame_id).or_default().push(record.annotation);
    }
    Ok(frames)
}

/// Reads detections grouped by frame id. Every record must carry a score.
pub fn read_detections(path: &Path) -> Result<BTreeMap<String, Vec<Detection>>, IoError> {
    let mut frames: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (line, record) in read_records(path)? {
        let score = record.score.ok_or(IoError::MissingScore {
            path: path.to_path_buf(),
            line,
        })?;
        let detection = Detection::new(record.annotation, score).map_err(|e| {
            IoError::MalformedLine {
                path: path.to_path_buf(),
                line,
                detail: e.to_string(),
            }
        })?;
        frames.entry(record.frame_id).or_default().push(detection);
    }
    Ok(frames)
}

fn check_frame_id(path: &Path, frame_id: &str) -> Result<(), IoError> {
    if frame_id.is_empty() || frame_id.chars().any(char::is_whitespace) {
        return Err(IoError::MalformedRecord {
            path: path.to_path_buf(),
            detail: format!("frame id {frame_id:?} must be non-empty and free of whitespace"),
        });
    }
    Ok(())
}

fn format_annotation(frame_id: &str, a: &ObjectAnnotation) -> String {
    format!(
        "{frame_id} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
        a.category, a.x, a.y, a.z, a.width, a.length, a.height, a.yaw
    )
}

/// Writes ground-truth boxes, one record per box, frames in map order.
pub fn write_ground_truth(
    path: &Path,
    frames: &BTreeMap<String, Vec<ObjectAnnotation>>,
) -> Result<(), IoError> {
    let mut text = String::new();
    for (frame_id, boxes) in frames {
        check_frame_id(path, frame_id)?;
        for a in boxes {
            text.push_str(&format_annotation(frame_id, a));
            text.push('\n');
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Writes detections with their scores, frames in map order.
pub fn write_detections(
    path: &Path,
    frames: &BTreeMap<String, Vec<Detection>>,
) -> Result<(), IoError> {
    let mut text = String::new();
    for (frame_id, dets) in frames {
        check_frame_id(path, frame_id)?;
        for d in dets {
            text.push_str(&format_annotation(frame_id, &d.annotation));
            text.push_str(&format!(" {:.6}\n", d.score));
        }
    }
    fs::write(path, text)?;
    Ok(())
}
