use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use super::EvalError;
use crate::cascade::Cascade;
use crate::image::{GrayImage, ScaleFactor};
use crate::pipeline::{Pipeline, PipelineConfig};
use crate::scalar::Real;

/// Frames excluded from timing at the start of every sequence.
pub const WARMUP_FRAMES: usize = 5;
/// Sequences shorter than this still run, with a warning.
pub const MIN_SEQUENCE_FRAMES: usize = 30;

/// Frames from one subject, processed in order.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub subject: String,
    pub frames: Vec<GrayImage>,
}

/// Throughput at one scale factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub sf: ScaleFactor,
    pub per_subject_fps: BTreeMap<String, f64>,
    pub mean_fps: f64,
}

/// Frames per second of the full pipeline for every SF in `sf_list`.
///
/// Only the pipeline call is timed. The first [`WARMUP_FRAMES`] frames of each
/// sequence are run untimed, fewer when the sequence is short so at least one
/// frame is always timed. Everything except `cfg.sf` is held fixed across the
/// sweep.
pub fn bench_speed<T: Real>(
    sequences: &[Sequence],
    sf_list: &[ScaleFactor],
    face: &Cascade<T>,
    eye: Option<&Cascade<T>>,
    cfg: &PipelineConfig,
    tilt: bool,
) -> Result<Vec<BenchRow>, EvalError> {
    if let Some(s) = sequences.iter().find(|s| s.frames.is_empty()) {
        return Err(EvalError::EmptySequence(s.subject.clone()));
    }
    for s in sequences.iter().filter(|s| s.frames.len() < MIN_SEQUENCE_FRAMES) {
        log::warn!("sequence {:?} has {} frames; timings from under {MIN_SEQUENCE_FRAMES} are noisy", s.subject, s.frames.len());
    }
    let mut rows = Vec::with_capacity(sf_list.len());
    for &sf in sf_list {
        let pipe = Pipeline::new(face.clone(), eye.cloned(), PipelineConfig { sf, ..cfg.clone() })?;
        let run = |img: &GrayImage| if tilt { pipe.detect_frame_with_tilt("", img) } else { pipe.detect_frame("", img) };
        let mut per_subject_fps = BTreeMap::new();
        for seq in sequences {
            let warm = WARMUP_FRAMES.min(seq.frames.len() - 1);
            for img in &seq.frames[..warm] {
                run(img)?;
            }
            let mut secs = 0.0;
            for img in &seq.frames[warm..] {
                let t = Instant::now();
                run(img)?;
                secs += t.elapsed().as_secs_f64();
            }
            let timed = (seq.frames.len() - warm) as f64;
            per_subject_fps.insert(seq.subject.clone(), timed / secs.max(1e-9));
        }
        let mean_fps = if per_subject_fps.is_empty() {
            0.0
        } else {
            per_subject_fps.values().sum::<f64>() / per_subject_fps.len() as f64
        };
        log::info!("SF {sf}: {mean_fps:.3} fps");
        rows.push(BenchRow { sf, per_subject_fps, mean_fps });
    }
    Ok(rows)
}
