use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{scaled_window, ScaledCascade};
use super::group::group_detections;
use super::model::{Cascade, Detection};
use super::CascadeError;
use crate::image::{integral, squared_integral, GrayImage, IntegralImage, Rect};
use crate::scalar::{round_half_up, Real};

/// Sliding-window search settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Ratio between successive window sizes.
    pub scale_step: f64,
    /// Smallest window width in pixels; the cascade base width when unset.
    pub min_window: Option<u32>,
    /// Largest window side in pixels; the image's smaller side when unset.
    pub max_window: Option<u32>,
    /// Stride as a fraction of the window width (at least 1 px).
    pub step_frac: f64,
    pub min_neighbors: u32,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { scale_step: 1.1, min_window: None, max_window: None, step_frac: 0.05, min_neighbors: 3 }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<(), CascadeError> {
        if self.scale_step <= 1.0 || !self.scale_step.is_finite() {
            return Err(CascadeError::Params(format!("scale_step must be > 1, got {}", self.scale_step)));
        }
        if self.step_frac <= 0.0 || !self.step_frac.is_finite() {
            return Err(CascadeError::Params(format!("step_frac must be > 0, got {}", self.step_frac)));
        }
        if let (Some(lo), Some(hi)) = (self.min_window, self.max_window) {
            if lo > hi {
                return Err(CascadeError::Params(format!("min_window {lo} exceeds max_window {hi}")));
            }
        }
        Ok(())
    }

    /// Single window size, useful for exhaustive checks.
    pub fn single_scale(window: u32) -> Self {
        ScanParams { min_window: Some(window), max_window: Some(window), ..Default::default() }
    }

    pub fn stride(&self, win_w: u32) -> u32 {
        (round_half_up(self.step_frac * win_w as f64) as u32).max(1)
    }
}

/// One window size visited by the scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanLevel {
    pub scale: f64,
    pub win_w: u32,
    pub win_h: u32,
    pub stride: u32,
}

/// The window sizes a scan over a `width` x `height` image visits, smallest
/// first.
pub fn scan_levels<T: Real>(cascade: &Cascade<T>, width: u32, height: u32, params: &ScanParams) -> Result<Vec<ScanLevel>, CascadeError> {
    params.validate()?;
    let min_window = params.min_window.unwrap_or(cascade.window_w).max(1);
    let max_window = params.max_window.unwrap_or(width.min(height));
    let base = min_window as f64 / cascade.window_w as f64;
    let (w0, h0) = scaled_window(cascade.window_w, cascade.window_h, base);
    if w0 > width || h0 > height {
        return Err(CascadeError::ImageTooSmall { width, height, window_w: w0, window_h: h0 });
    }
    let mut levels = Vec::new();
    for k in 0.. {
        let scale = base * params.scale_step.powi(k);
        let (win_w, win_h) = scaled_window(cascade.window_w, cascade.window_h, scale);
        if win_w > width || win_h > height || win_w.max(win_h) > max_window.max(w0.max(h0)) {
            break;
        }
        levels.push(ScanLevel { scale, win_w, win_h, stride: params.stride(win_w) });
    }
    Ok(levels)
}

/// Raw (ungrouped) windows accepted by every stage, in ascending scale then
/// row-major order.
pub fn detect_multiscale<T: Real>(cascade: &Cascade<T>, img: &GrayImage, params: &ScanParams) -> Result<Vec<Detection>, CascadeError> {
    detect_multiscale_integral(cascade, &integral(img), &squared_integral(img), params)
}

/// As [`detect_multiscale`], over precomputed integral tables.
///
/// Rows of every level are evaluated in parallel; results are concatenated in
/// sequential order, so the output does not depend on the thread count.
pub fn detect_multiscale_integral<T: Real>(
    cascade: &Cascade<T>,
    ii: &IntegralImage,
    sqii: &IntegralImage,
    params: &ScanParams,
) -> Result<Vec<Detection>, CascadeError> {
    let (width, height) = (ii.width() - 1, ii.height() - 1);
    let levels = scan_levels(cascade, width, height, params)?;
    let stride = ii.width() as usize;
    let scaled: Vec<ScaledCascade<T>> = levels.iter().map(|l| ScaledCascade::new(cascade, l.scale, stride)).collect();
    let depth = cascade.stage_count();

    let rows: Vec<(usize, u32)> = levels
        .iter()
        .enumerate()
        .flat_map(|(li, l)| (0..=height - l.win_h).step_by(l.stride as usize).map(move |y| (li, y)))
        .collect();

    let found: Vec<Vec<Detection>> = rows
        .par_iter()
        .map(|&(li, y)| {
            let level = &levels[li];
            let sc = &scaled[li];
            (0..=width - level.win_w)
                .step_by(level.stride as usize)
                .filter(|&x| sc.depth(ii, sqii, x, y) == depth)
                .map(|x| Detection::raw(Rect::new(x, y, level.win_w, level.win_h), depth as u32))
                .collect()
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Scan and group with `params.min_neighbors`.
pub fn detect_objects<T: Real>(cascade: &Cascade<T>, img: &GrayImage, params: &ScanParams) -> Result<Vec<Detection>, CascadeError> {
    Ok(group_detections(&detect_multiscale(cascade, img, params)?, params.min_neighbors))
}
