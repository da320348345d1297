//! Ground truth, confusion rates, ROC analysis, speed benchmarks and reports.

mod bench;
mod confusion;
mod report;
mod roc;
mod truth;

use std::path::PathBuf;

use thiserror::Error;

use crate::pipeline::PipelineError;

pub use bench::{bench_speed, BenchRow, Sequence, MIN_SEQUENCE_FRAMES, WARMUP_FRAMES};
pub use confusion::{accuracy, confusion, eye_confusion, fpr, tpr, ConfusionCounts, MatchMode, Rate};
pub use report::{
    render_svg, write_accuracy_report, write_auc_report, write_roc_reports, write_speed_report, PLOT_HEIGHT, PLOT_WIDTH,
};
pub use roc::{auc, frame_scores, roc_curve, RocCurve, RocPoint};
pub use truth::{load_ground_truth, parse_ground_truth, write_ground_truth, GroundTruthRecord};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: duplicate frame_id {frame_id:?}")]
    DuplicateFrame { line: usize, frame_id: String },
    #[error("no ground truth for frame {0:?}")]
    MissingGroundTruth(String),
    #[error("malformed ROC curve: {0}")]
    MalformedCurve(String),
    #[error("ROC needs both positive and negative frames, got {positives} positive and {negatives} negative")]
    DegenerateLabels { positives: u64, negatives: u64 },
    #[error("score of frame {0:?} is not finite")]
    NonFiniteScore(String),
    #[error("benchmark sequence {0:?} has no frames")]
    EmptySequence(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl EvalError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EvalError::Io { path: path.into(), source }
    }
}
