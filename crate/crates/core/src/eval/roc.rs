use std::collections::HashMap;

use serde::Serialize;

use super::{EvalError, GroundTruthRecord};
use crate::pipeline::FrameResult;
use crate::scalar::Field;

/// One operating point. Frames scoring at least `threshold` are called
/// positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
    pub threshold: f64,
}

/// Operating points sorted by ascending fpr, from (0, 0) to (1, 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
}

impl<T: Field> RocCurve<T> {
    pub fn new(points: Vec<RocPoint<T>>) -> Result<Self, EvalError> {
        let curve = RocCurve { points };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::MalformedCurve(m.into()));
        let (zero, one) = (T::zero(), T::one());
        let (Some(first), Some(last)) = (self.points.first(), self.points.last()) else {
            return bad("no points");
        };
        if first.fpr != zero || first.tpr != zero {
            return bad("does not start at (0, 0)");
        }
        if last.fpr != one || last.tpr != one {
            return bad("does not end at (1, 1)");
        }
        for p in &self.points {
            if !(p.fpr >= zero && p.fpr <= one && p.tpr >= zero && p.tpr <= one) {
                return bad("coordinate outside [0, 1]");
            }
        }
        for w in self.points.windows(2) {
            if w[1].fpr < w[0].fpr {
                return bad("fpr decreases");
            }
            if w[1].tpr < w[0].tpr {
                return bad("tpr decreases");
            }
        }
        Ok(())
    }
}

/// Per-frame detector confidence: the best face's neighbor count, 0 when no
/// face was found.
pub fn frame_scores(results: &[FrameResult]) -> Vec<(String, f64)> {
    results.iter().map(|r| (r.frame_id.clone(), f64::from(r.face_score()))).collect()
}

/// Sweep a threshold over the distinct scores, plus `+inf` and `-inf`, and
/// record (fpr, tpr) at each. Repeated points are kept once, with the highest
/// threshold that produced them.
pub fn roc_curve<T: Field>(scored: &[(String, f64)], gt: &[GroundTruthRecord]) -> Result<RocCurve<T>, EvalError> {
    let by_id: HashMap<&str, bool> = gt.iter().map(|r| (r.frame_id.as_str(), r.face_present)).collect();
    let mut labelled = Vec::with_capacity(scored.len());
    for (id, score) in scored {
        let present = *by_id.get(id.as_str()).ok_or_else(|| EvalError::MissingGroundTruth(id.clone()))?;
        if !score.is_finite() {
            return Err(EvalError::NonFiniteScore(id.clone()));
        }
        labelled.push((*score, present));
    }
    let positives = labelled.iter().filter(|(_, p)| *p).count() as u64;
    let negatives = labelled.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::DegenerateLabels { positives, negatives });
    }

    let mut thresholds: Vec<f64> = labelled.iter().map(|(s, _)| *s).collect();
    thresholds.push(f64::INFINITY);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let (p, n) = (T::from_count(positives), T::from_count(negatives));
    let mut points: Vec<RocPoint<T>> = Vec::with_capacity(thresholds.len());
    for t in thresholds {
        let (mut tp, mut fp) = (0u64, 0u64);
        for &(s, present) in &labelled {
            if s >= t {
                if present {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let point = RocPoint { fpr: T::from_count(fp) / n.clone(), tpr: T::from_count(tp) / p.clone(), threshold: t };
        if !points.iter().any(|q| q.fpr == point.fpr && q.tpr == point.tpr) {
            points.push(point);
        }
    }
    // the sweep is already monotone in both coordinates; the stable sort only
    // fixes the documented order
    points.sort_by(|a, b| {
        a.fpr
            .partial_cmp(&b.fpr)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.tpr.partial_cmp(&b.tpr).unwrap_or(std::cmp::Ordering::Equal))
    });
    RocCurve::new(points)
}

/// Trapezoidal area under `curve`.
pub fn auc<T: Field>(curve: &RocCurve<T>) -> Result<T, EvalError> {
    curve.validate()?;
    let two = T::one() + T::one();
    Ok(curve.points.windows(2).fold(T::zero(), |acc, w| {
        let dx = w[1].fpr.clone() - w[0].fpr.clone();
        acc + dx * (w[0].tpr.clone() + w[1].tpr.clone()) / two.clone()
    }))
}
