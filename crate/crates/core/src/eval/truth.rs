use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::image::Rect;

/// Manual labels for one frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame_id: String,
    pub face_present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_box: Option<Rect>,
    pub eyes_present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eye_boxes: Option<Vec<Rect>>,
}

impl GroundTruthRecord {
    pub fn absent(frame_id: impl Into<String>) -> Self {
        GroundTruthRecord { frame_id: frame_id.into(), face_present: false, face_box: None, eyes_present: false, eye_boxes: None }
    }

    /// Check the presence/box invariants. The message names the offending
    /// field.
    pub fn validate(&self) -> Result<(), String> {
        if self.frame_id.is_empty() {
            return Err("frame_id: must not be empty".into());
        }
        if let Some(b) = self.face_box {
            if !self.face_present {
                return Err("face_box: given while face_present is false".into());
            }
            if b.is_empty() {
                return Err(format!("face_box: {b} has zero extent"));
            }
        }
        if let Some(boxes) = &self.eye_boxes {
            if !self.eyes_present {
                return Err("eye_boxes: given while eyes_present is false".into());
            }
            if let Some(b) = boxes.iter().find(|b| b.is_empty()) {
                return Err(format!("eye_boxes: {b} has zero extent"));
            }
        }
        Ok(())
    }
}

/// Parse JSON-lines ground truth. Blank lines are skipped.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruthRecord>, EvalError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GroundTruthRecord =
            serde_json::from_str(line).map_err(|e| EvalError::Schema { line: line_no, message: e.to_string() })?;
        rec.validate().map_err(|message| EvalError::Schema { line: line_no, message })?;
        if !seen.insert(rec.frame_id.clone()) {
            return Err(EvalError::DuplicateFrame { line: line_no, frame_id: rec.frame_id });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthRecord>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    parse_ground_truth(&text)
}

/// One JSON object per line, in the given order.
pub fn write_ground_truth<'a>(records: impl IntoIterator<Item = &'a GroundTruthRecord>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_one_record() {
        let line = r#"{"frame_id":"f001","face_present":true,"face_box":[100,80,120,120],"eyes_present":true}"#;
        let recs = parse_ground_truth(line).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].face_box, Some(Rect::new(100, 80, 120, 120)));
        assert!(recs[0].eyes_present);
        assert_eq!(recs[0].eye_boxes, None);
    }

    #[test]
    fn box_without_presence_is_schema_error() {
        let line = r#"{"frame_id":"f001","face_present":false,"face_box":[1,1,5,5],"eyes_present":false}"#;
        let err = parse_ground_truth(line).unwrap_err();
        assert!(matches!(&err, EvalError::Schema { line: 1, message } if message.contains("face_box")), "{err}");
    }

    #[test]
    fn missing_field_is_schema_error() {
        let err = parse_ground_truth(r#"{"frame_id":"f001","face_present":false}"#).unwrap_err();
        assert!(matches!(&err, EvalError::Schema { message, .. } if message.contains("eyes_present")), "{err}");
    }

    #[test]
    fn duplicate_frames_rejected() {
        let text = "{\"frame_id\":\"f001\",\"face_present\":false,\"eyes_present\":false}\n\n\
                    {\"frame_id\":\"f001\",\"face_present\":true,\"eyes_present\":false}\n";
        assert!(matches!(parse_ground_truth(text), Err(EvalError::DuplicateFrame { line: 3, .. })));
    }

    #[test]
    fn write_then_parse_round_trips() {
        let recs = vec![
            GroundTruthRecord::absent("a"),
            GroundTruthRecord {
                frame_id: "b".into(),
                face_present: true,
                face_box: Some(Rect::new(1, 2, 3, 4)),
                eyes_present: true,
                eye_boxes: Some(vec![Rect::new(1, 2, 1, 1), Rect::new(3, 2, 1, 1)]),
            },
        ];
        assert_eq!(parse_ground_truth(&write_ground_truth(&recs)).unwrap(), recs);
    }
}
