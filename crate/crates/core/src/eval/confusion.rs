use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EvalError, GroundTruthRecord};
use crate::pipeline::FrameResult;
use crate::scalar::Field;

/// Frame-level tally of detector outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    /// Positive frames, tp + fn.
    pub fn p(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Negative frames, fp + tn.
    pub fn n(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.p() + self.n()
    }

    /// Counts with the positive and negative classes swapped.
    pub fn relabeled(&self) -> Self {
        ConfusionCounts { tp: self.tn, fp: self.fn_, tn: self.tp, fn_: self.fp }
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }
}

/// A ratio that is undefined when its denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rate<T> {
    Defined(T),
    Undefined,
}

impl<T> Rate<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Rate::Defined(v) => Some(v),
            Rate::Undefined => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Rate::Defined(_))
    }
}

impl<T: fmt::Display> fmt::Display for Rate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Defined(v) => v.fmt(f),
            Rate::Undefined => f.write_str("undefined"),
        }
    }
}

fn ratio<T: Field>(num: u64, den: u64) -> Rate<T> {
    if den == 0 {
        Rate::Undefined
    } else {
        Rate::Defined(T::from_count(num) / T::from_count(den))
    }
}

/// tp / (tp + fn)
pub fn tpr<T: Field>(c: &ConfusionCounts) -> Rate<T> {
    ratio(c.tp, c.p())
}

/// fp / (fp + tn)
pub fn fpr<T: Field>(c: &ConfusionCounts) -> Rate<T> {
    ratio(c.fp, c.n())
}

/// (tp + tn) / (p + n)
pub fn accuracy<T: Field>(c: &ConfusionCounts) -> Rate<T> {
    ratio(c.tp + c.tn, c.total())
}

/// How a detection is matched against a labelled frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum MatchMode {
    /// Any face in a face-present frame is a hit.
    #[default]
    Presence,
    /// On face-present frames the best detection must overlap the marked box
    /// by at least this IoU; a detection that does not is scored a false
    /// positive. Frames without a marked box fall back to presence.
    Iou(f64),
}

fn index(gt: &[GroundTruthRecord]) -> HashMap<&str, &GroundTruthRecord> {
    gt.iter().map(|r| (r.frame_id.as_str(), r)).collect()
}

fn tally(c: &mut ConfusionCounts, present: bool, hit: bool, misplaced: bool) {
    match (present, hit) {
        (true, true) if misplaced => c.fp += 1,
        (true, true) => c.tp += 1,
        (true, false) => c.fn_ += 1,
        (false, true) => c.fp += 1,
        (false, false) => c.tn += 1,
    }
}

/// Count face outcomes over `results`. Every result must have a ground-truth
/// record; records without a result are ignored.
pub fn confusion(results: &[FrameResult], gt: &[GroundTruthRecord], mode: MatchMode) -> Result<ConfusionCounts, EvalError> {
    let by_id = index(gt);
    let mut c = ConfusionCounts::default();
    for r in results {
        let truth = by_id.get(r.frame_id.as_str()).ok_or_else(|| EvalError::MissingGroundTruth(r.frame_id.clone()))?;
        let misplaced = match (mode, truth.face_box) {
            (MatchMode::Iou(tau), Some(marked)) if truth.face_present && !r.faces.is_empty() => {
                let best = r.faces.iter().map(|d| d.rect.iou(&marked)).fold(0.0, f64::max);
                best < tau
            }
            _ => false,
        };
        tally(&mut c, truth.face_present, r.face_present, misplaced);
    }
    Ok(c)
}

/// Presence-mode counts for the eyes labels.
pub fn eye_confusion(results: &[FrameResult], gt: &[GroundTruthRecord]) -> Result<ConfusionCounts, EvalError> {
    let by_id = index(gt);
    let mut c = ConfusionCounts::default();
    for r in results {
        let truth = by_id.get(r.frame_id.as_str()).ok_or_else(|| EvalError::MissingGroundTruth(r.frame_id.clone()))?;
        tally(&mut c, truth.eyes_present, r.eyes_present, false);
    }
    Ok(c)
}
