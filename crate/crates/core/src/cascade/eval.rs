//! Variance-normalized evaluation of cascade stages at one window scale.

use super::model::{Cascade, Stage};
use super::CascadeError;
use crate::image::{IntegralImage, Rect};
use crate::scalar::{round_half_up, Real};

/// Intensity statistics of one window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStats<T> {
    pub mean: T,
    /// Standard deviation clamped to at least 1.
    pub stddev: T,
    pub raw_stddev: T,
}

/// Mean and standard deviation of the pixels in `window`.
///
/// The variance is formed exactly in integers as `n·Σx² − (Σx)²` before the
/// square root, so flat patches give exactly zero.
pub fn window_mean_stddev<T: Real>(ii: &IntegralImage, sqii: &IntegralImage, window: Rect) -> Result<WindowStats<T>, CascadeError> {
    let sum = crate::image::rect_sum(ii, window)?;
    let sq = crate::image::rect_sum(sqii, window)?;
    let n = window.area();
    let spread = variance_numerator(n, sum, sq);
    let nf = T::of(n as f64);
    let raw_stddev = T::of((spread as f64).sqrt()) / nf;
    Ok(WindowStats { mean: T::of(sum as f64) / nf, stddev: raw_stddev.max(T::one()), raw_stddev })
}

#[inline(always)]
fn variance_numerator(n: u64, sum: u64, sq: u64) -> u128 {
    (u128::from(n) * u128::from(sq)).saturating_sub(u128::from(sum) * u128::from(sum))
}

/// Base window scaled and rounded half-up.
pub fn scaled_window(base_w: u32, base_h: u32, scale: f64) -> (u32, u32) {
    (round_half_up(base_w as f64 * scale) as u32, round_half_up(base_h as f64 * scale) as u32)
}

/// Variance normalization region: the window inset by one base pixel on
/// every side, which is the region pre-trained OpenCV cascades were
/// normalized over.
pub fn normalization_rect(base_w: u32, base_h: u32, scale: f64) -> Rect {
    let (win_w, win_h) = scaled_window(base_w, base_h, scale);
    let inset = (round_half_up(scale) as u32).max(1);
    let w = (round_half_up((base_w - 2) as f64 * scale) as u32).clamp(1, win_w.saturating_sub(inset).max(1));
    let h = (round_half_up((base_h - 2) as f64 * scale) as u32).clamp(1, win_h.saturating_sub(inset).max(1));
    Rect::new(inset.min(win_w - w), inset.min(win_h - h), w, h)
}

#[derive(Clone, Copy, Debug)]
struct ScaledRect<T> {
    // integral-table offsets of the four corners relative to the window origin
    tl: usize,
    tr: usize,
    bl: usize,
    br: usize,
    weight: T,
}

#[derive(Clone, Debug)]
struct ScaledStump<T> {
    rects: [ScaledRect<T>; 3],
    len: usize,
    threshold: T,
    left: T,
    right: T,
}

/// A cascade resampled to one window size, with rect corners pre-resolved
/// against the row stride of a particular integral image.
#[derive(Clone, Debug)]
pub struct ScaledCascade<T> {
    pub scale: f64,
    pub win_w: u32,
    pub win_h: u32,
    norm: Rect,
    norm_offsets: [usize; 4],
    stride: usize,
    stumps: Vec<ScaledStump<T>>,
    stages: Vec<(usize, usize, T)>,
}

fn corners(stride: usize, x: u32, y: u32, w: u32, h: u32) -> [usize; 4] {
    let (x, y, w, h) = (x as usize, y as usize, w as usize, h as usize);
    [y * stride + x, y * stride + x + w, (y + h) * stride + x, (y + h) * stride + x + w]
}

impl<T: Real> ScaledCascade<T> {
    pub fn new(cascade: &Cascade<T>, scale: f64, stride: usize) -> Self {
        Self::from_stages(&cascade.stages, cascade.window_w, cascade.window_h, scale, stride)
    }

    fn from_stages(stages: &[Stage<T>], base_w: u32, base_h: u32, scale: f64, stride: usize) -> Self {
        let (win_w, win_h) = scaled_window(base_w, base_h, scale);
        let norm = normalization_rect(base_w, base_h, scale);
        let mut stumps = Vec::new();
        let mut ranges = Vec::with_capacity(stages.len());
        for stage in stages {
            let start = stumps.len();
            for weak in &stage.classifiers {
                stumps.push(scale_stump(weak, win_w, win_h, scale, stride));
            }
            ranges.push((start, stumps.len(), stage.threshold));
        }
        ScaledCascade {
            scale,
            win_w,
            win_h,
            norm,
            norm_offsets: corners(stride, norm.x, norm.y, norm.w, norm.h),
            stride,
            stumps,
            stages: ranges,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn normalization_rect(&self) -> Rect {
        self.norm
    }

    /// `area · max(1, stddev)` over the normalization rect of the window at
    /// `(x, y)`.
    #[inline(always)]
    fn norm_factor(&self, ii: &[u64], sq: &[u64], base: usize) -> T {
        let [tl, tr, bl, br] = self.norm_offsets;
        let s = (ii[base + br] + ii[base + tl]) - (ii[base + tr] + ii[base + bl]);
        let s2 = (sq[base + br] + sq[base + tl]) - (sq[base + tr] + sq[base + bl]);
        let n = self.norm.area();
        let root = (variance_numerator(n, s, s2) as f64).sqrt();
        T::of(root.max(n as f64))
    }

    #[inline(always)]
    fn stage_sum_at(&self, stage: usize, ii: &[u64], base: usize, nf: T) -> T {
        let (start, end, _) = self.stages[stage];
        let mut total = T::zero();
        for stump in &self.stumps[start..end] {
            let mut value = T::zero();
            for r in &stump.rects[..stump.len] {
                let s = (ii[base + r.br] + ii[base + r.tl]) - (ii[base + r.tr] + ii[base + r.bl]);
                value = value + r.weight * T::of(s as f64);
            }
            // value / nf < threshold, without the division
            total = total + if value < stump.threshold * nf { stump.left } else { stump.right };
        }
        total
    }

    /// Number of consecutive stages the window at `(x, y)` passes.
    #[inline]
    pub fn depth(&self, ii: &IntegralImage, sqii: &IntegralImage, x: u32, y: u32) -> usize {
        let (d, q) = (ii.entries(), sqii.entries());
        let base = y as usize * self.stride + x as usize;
        let nf = self.norm_factor(d, q, base);
        for (i, &(_, _, threshold)) in self.stages.iter().enumerate() {
            if self.stage_sum_at(i, d, base, nf) < threshold {
                return i;
            }
        }
        self.stages.len()
    }

    fn check_window(&self, ii: &IntegralImage, x: u32, y: u32) -> Result<(), CascadeError> {
        let r = Rect::new(x, y, self.win_w, self.win_h);
        if ii.width() as usize != self.stride || !r.fits_in(ii.width() - 1, ii.height() - 1) {
            return Err(CascadeError::OutOfBounds(r));
        }
        Ok(())
    }
}

fn scale_stump<T: Real>(weak: &super::WeakClassifier<T>, win_w: u32, win_h: u32, scale: f64, stride: usize) -> ScaledStump<T> {
    let mut scaled = [(0u32, 0u32, 0u32, 0u32); 3];
    let len = weak.feature.rects.len().min(3);
    for (slot, r) in scaled.iter_mut().zip(&weak.feature.rects) {
        let x = (round_half_up(r.rect.x as f64 * scale) as u32).min(win_w - 1);
        let y = (round_half_up(r.rect.y as f64 * scale) as u32).min(win_h - 1);
        let w = (round_half_up(r.rect.w as f64 * scale) as u32).clamp(1, win_w - x);
        let h = (round_half_up(r.rect.h as f64 * scale) as u32).clamp(1, win_h - y);
        *slot = (x, y, w, h);
    }
    let mut weights: Vec<T> = weak.feature.rects.iter().map(|r| r.weight).collect();
    // re-balance the first (compensating) rect against the rounded areas
    let area = |i: usize| T::of(f64::from(scaled[i].2) * f64::from(scaled[i].3));
    let rest = (1..len).fold(T::zero(), |acc, i| acc + weights[i] * area(i));
    weights[0] = -rest / area(0);

    let mut rects = [ScaledRect { tl: 0, tr: 0, bl: 0, br: 0, weight: T::zero() }; 3];
    for i in 0..len {
        let (x, y, w, h) = scaled[i];
        let [tl, tr, bl, br] = corners(stride, x, y, w, h);
        rects[i] = ScaledRect { tl, tr, bl, br, weight: weights[i] };
    }
    ScaledStump { rects, len, threshold: weak.threshold, left: weak.left_val, right: weak.right_val }
}

/// Evaluate one stage on `window`, which must be the base window scaled by
/// `scale`. Returns whether the stage passed and its summed leaf values.
pub fn eval_stage<T: Real>(
    stage: &Stage<T>,
    base: (u32, u32),
    ii: &IntegralImage,
    sqii: &IntegralImage,
    window: Rect,
    scale: f64,
) -> Result<(bool, T), CascadeError> {
    let scaled = ScaledCascade::from_stages(std::slice::from_ref(stage), base.0, base.1, scale, ii.width() as usize);
    if (window.w, window.h) != (scaled.win_w, scaled.win_h) {
        return Err(CascadeError::Validation(format!(
            "window {window} is not the {}x{} base window at scale {scale}",
            base.0, base.1
        )));
    }
    scaled.check_window(ii, window.x, window.y)?;
    let base_idx = window.y as usize * scaled.stride + window.x as usize;
    let nf = scaled.norm_factor(ii.entries(), sqii.entries(), base_idx);
    let sum = scaled.stage_sum_at(0, ii.entries(), base_idx, nf);
    Ok((sum >= stage.threshold, sum))
}
