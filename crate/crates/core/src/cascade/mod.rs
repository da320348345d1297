//! Haar cascade models and sliding-window inference.

mod eval;
mod group;
mod model;
mod native;
mod scan;
mod xml;

use std::path::Path;

use thiserror::Error;

use crate::image::{ImageError, Rect};
use crate::scalar::Real;

pub use eval::{eval_stage, normalization_rect, scaled_window, window_mean_stddev, ScaledCascade, WindowStats};
pub use group::{group_detections, GROUP_IOU};
pub use model::{Cascade, Detection, HaarFeature, Stage, WeakClassifier, WeightedRect};
pub use native::{parse_native, to_native};
pub use scan::{detect_multiscale, detect_multiscale_integral, detect_objects, scan_levels, ScanLevel, ScanParams};
pub use xml::{parse_opencv_xml, to_legacy_xml};

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("cascade parse error: {0}")]
    Parse(String),
    #[error("unsupported cascade construct: {0}")]
    Unsupported(String),
    #[error("invalid cascade: {0}")]
    Validation(String),
    #[error("invalid scan parameters: {0}")]
    Params(String),
    #[error("window {0} is outside the image")]
    OutOfBounds(Rect),
    #[error("{width}x{height} image is smaller than the {window_w}x{window_h} detection window")]
    ImageTooSmall { width: u32, height: u32, window_w: u32, window_h: u32 },
    #[error("cannot read cascade {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<ImageError> for CascadeError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::OutOfBounds { rect, .. } => CascadeError::OutOfBounds(rect),
            other => CascadeError::Validation(other.to_string()),
        }
    }
}

/// Parse a cascade in either OpenCV XML dialect or the native text format,
/// chosen by the first non-comment content.
pub fn parse_cascade<T: Real>(source: &str) -> Result<Cascade<T>, CascadeError> {
    let first = source
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if first.starts_with('<') {
        parse_opencv_xml(source)
    } else if first.starts_with("CASCADE") {
        parse_native(source)
    } else {
        Err(CascadeError::Parse("neither XML nor native cascade text".into()))
    }
}

/// Read and parse a cascade file. XML models are named after the file stem.
pub fn load_cascade<T: Real>(path: impl AsRef<Path>) -> Result<Cascade<T>, CascadeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CascadeError::Io { path: path.to_owned(), source })?;
    let mut cascade = parse_cascade(&text)?;
    if cascade.name == "cascade" {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            cascade.name = stem.to_string();
        }
    }
    Ok(cascade)
}
