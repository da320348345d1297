//! Downsample, detect, remap: the face and eye pipeline.
//!
//! A frame is shrunk by the scale factor, faces are searched in the small
//! image, the boxes are remapped onto the full-resolution frame, and eyes are
//! searched at full resolution inside regions cut from the best face. When a
//! frame yields no upright face, an in-plane rotation sweep can be tried.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{
    detect_multiscale, detect_multiscale_integral, group_detections, Cascade, CascadeError, Detection, ScanParams,
};
use crate::image::{
    downsample, integral, invert, rotation_matrix, squared_integral, warp_affine, AffineMatrix, GrayImage, ImageError,
    Rect, ScaleFactor,
};
use crate::scalar::{round_half_up, Real};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error("face {0} is too small for eye regions (needs at least 8x8)")]
    FaceTooSmall(Rect),
    #[error("{width}x{height} frame is too small for a {window_w}x{window_h} window at SF {sf}")]
    ImageTooSmall { width: u32, height: u32, window_w: u32, window_h: u32, sf: ScaleFactor },
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
}

/// Placement of the two eye search regions as fractions of the face box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EyeRoiSpec {
    /// Offset of the regions below the top of the face.
    pub top: f64,
    /// Region height.
    pub height: f64,
    /// Region width; the right region starts at this fraction too.
    pub width: f64,
}

impl Default for EyeRoiSpec {
    fn default() -> Self {
        EyeRoiSpec { top: 0.20, height: 0.35, width: 0.50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sf: ScaleFactor,
    pub face_params: ScanParams,
    pub eye_params: ScanParams,
    /// Rotation sweep in degrees, tried in order.
    pub tilt_angles: Vec<f64>,
    pub eye_roi: EyeRoiSpec,
}

pub const DEFAULT_TILT_ANGLES: [f64; 5] = [0.0, -15.0, 15.0, -30.0, 30.0];

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sf: ScaleFactor::ONE,
            face_params: ScanParams::default(),
            eye_params: ScanParams::default(),
            tilt_angles: DEFAULT_TILT_ANGLES.to_vec(),
            eye_roi: EyeRoiSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn with_sf(sf: ScaleFactor) -> Self {
        PipelineConfig { sf, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.tilt_angles.contains(&0.0) {
            return Err(PipelineError::Config("tilt angles must include 0".into()));
        }
        if let Some(a) = self.tilt_angles.iter().find(|a| !(-45.0..=45.0).contains(*a)) {
            return Err(PipelineError::Config(format!("tilt angle {a} outside [-45, 45]")));
        }
        let roi = &self.eye_roi;
        let frac = |v: f64| (0.0..=1.0).contains(&v);
        if !(frac(roi.top) && frac(roi.height) && frac(roi.width) && roi.top + roi.height <= 1.0) {
            return Err(PipelineError::Config(format!("eye region fractions {roi:?} leave the face")));
        }
        self.face_params.validate()?;
        self.eye_params.validate()?;
        Ok(())
    }
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub downsample: f64,
    pub integral: f64,
    pub face_scan: f64,
    pub eye_scan: f64,
    pub tilt_extra: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.downsample + self.integral + self.face_scan + self.eye_scan + self.tilt_extra
    }
}

/// Everything found in one frame, in full-resolution coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_id: String,
    pub faces: Vec<Detection>,
    pub eyes: Vec<Detection>,
    pub face_present: bool,
    pub eyes_present: bool,
    pub elapsed: StageTimings,
}

impl FrameResult {
    /// Confidence used for ROC sweeps: the best face's neighbor count, 0 when
    /// no face was found.
    pub fn face_score(&self) -> u32 {
        self.faces.iter().map(|d| d.score).max().unwrap_or(0)
    }
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Scale a box found in a frame downsampled by `sf` onto the `frame_w` x
/// `frame_h` original, clamped to its bounds.
pub fn remap_detection(det: &Detection, sf: ScaleFactor, frame_w: u32, frame_h: u32) -> Detection {
    let s = sf.value();
    let up = |v: u32| round_half_up(f64::from(v) * s) as u32;
    let r = det.rect;
    let x = up(r.x).min(frame_w.saturating_sub(1));
    let y = up(r.y).min(frame_h.saturating_sub(1));
    let w = up(r.w).clamp(1, frame_w - x);
    let h = up(r.h).clamp(1, frame_h - y);
    Detection { rect: Rect::new(x, y, w, h), sf_context: ScaleFactor::ONE, ..*det }
}

/// Left and right eye search regions inside `face`.
pub fn eye_roi(face: Rect, spec: &EyeRoiSpec) -> Result<(Rect, Rect), PipelineError> {
    if face.w < 8 || face.h < 8 {
        return Err(PipelineError::FaceTooSmall(face));
    }
    let frac = |len: u32, f: f64| round_half_up(f64::from(len) * f) as u32;
    let dy = frac(face.h, spec.top).min(face.h - 1);
    let h = frac(face.h, spec.height).clamp(1, face.h - dy);
    let half = frac(face.w, spec.width).clamp(1, face.w - 1);
    let left = Rect::new(face.x, face.y + dy, half, h);
    let right_w = half.min(face.w - half);
    let right = Rect::new(face.x + half, face.y + dy, right_w, h);
    Ok((left, right))
}

/// Order by descending score, then larger area, then row-major position.
fn best_detection(dets: &[Detection]) -> Option<&Detection> {
    dets.iter().min_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(b.rect.area().cmp(&a.rect.area()))
            .then((a.rect.y, a.rect.x).cmp(&(b.rect.y, b.rect.x)))
    })
}

/// Axis-aligned box of `size` centred on `center` (pixel-index coordinates),
/// kept inside `bounds`.
fn box_at(center: (f64, f64), w: u32, h: u32, bounds: Rect) -> Rect {
    let w = w.min(bounds.w);
    let h = h.min(bounds.h);
    let place = |c: f64, len: u32, lo: u32, span: u32| {
        let start = round_half_up(c - (f64::from(len) - 1.0) / 2.0);
        start.clamp(f64::from(lo), f64::from(lo + span - len)) as u32
    };
    Rect::new(place(center.0, w, bounds.x, bounds.w), place(center.1, h, bounds.y, bounds.h), w, h)
}

fn index_center(r: &Rect) -> (f64, f64) {
    (f64::from(r.x) + (f64::from(r.w) - 1.0) / 2.0, f64::from(r.y) + (f64::from(r.h) - 1.0) / 2.0)
}

fn rotation_about_center<T: Real>(img: &GrayImage, angle: f64) -> Result<AffineMatrix<T>, ImageError> {
    let center = (T::of((f64::from(img.width()) - 1.0) / 2.0), T::of((f64::from(img.height()) - 1.0) / 2.0));
    rotation_matrix(center, T::of(angle), T::one())
}

/// A face found by the tilt sweep: its box in the rotated small frame and the
/// upright box mapped back through the rotation.
struct TiltHit {
    rotated: Detection,
    upright: Detection,
}

/// Face and eye detector over a pair of cascades.
#[derive(Clone, Debug)]
pub struct Pipeline<T> {
    pub face: Cascade<T>,
    pub eye: Option<Cascade<T>>,
    pub config: PipelineConfig,
}

impl<T: Real> Pipeline<T> {
    pub fn new(face: Cascade<T>, eye: Option<Cascade<T>>, config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Pipeline { face, eye, config })
    }

    fn check_size(&self, img: &GrayImage) -> Result<(), PipelineError> {
        let sf = self.config.sf;
        let need = |base: u32| f64::from(base) * sf.value();
        if f64::from(img.width()) < need(self.face.window_w) || f64::from(img.height()) < need(self.face.window_h) {
            return Err(PipelineError::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                window_w: self.face.window_w,
                window_h: self.face.window_h,
                sf,
            });
        }
        Ok(())
    }

    /// Grouped faces in `small`, tagged with the pipeline's SF.
    fn scan_faces(&self, small: &GrayImage, timings: &mut StageTimings) -> Result<Vec<Detection>, PipelineError> {
        let t = Instant::now();
        let ii = integral(small);
        let sq = squared_integral(small);
        timings.integral += millis(t);

        let t = Instant::now();
        let raw = detect_multiscale_integral(&self.face, &ii, &sq, &self.config.face_params)?;
        let mut faces = group_detections(&raw, self.config.face_params.min_neighbors);
        for f in &mut faces {
            f.sf_context = self.config.sf;
        }
        timings.face_scan += millis(t);
        Ok(faces)
    }

    /// Best eye per region, searched in `frame` (which is the full-resolution
    /// image the face box refers to).
    fn eyes_in(&self, frame: &GrayImage, face: Rect) -> Result<Vec<Detection>, PipelineError> {
        let Some(eye) = &self.eye else { return Ok(Vec::new()) };
        let Ok((left, right)) = eye_roi(face, &self.config.eye_roi) else { return Ok(Vec::new()) };
        let mut eyes = Vec::new();
        for roi in [left, right] {
            if roi.w < eye.window_w || roi.h < eye.window_h {
                continue;
            }
            let crop = frame.crop(roi)?;
            let raw = detect_multiscale(eye, &crop, &self.config.eye_params)?;
            let grouped = group_detections(&raw, self.config.eye_params.min_neighbors);
            if let Some(best) = best_detection(&grouped) {
                eyes.push(Detection { rect: best.rect.translate(roi.x, roi.y), ..*best });
            }
        }
        Ok(eyes)
    }

    /// Run the upright pipeline on one frame.
    pub fn detect_frame(&self, frame_id: &str, img: &GrayImage) -> Result<FrameResult, PipelineError> {
        self.check_size(img)?;
        let mut elapsed = StageTimings::default();
        let t = Instant::now();
        let small = downsample(img, self.config.sf)?;
        elapsed.downsample = millis(t);

        let faces: Vec<Detection> = self
            .scan_faces(&small, &mut elapsed)?
            .iter()
            .map(|d| remap_detection(d, self.config.sf, img.width(), img.height()))
            .collect();

        let t = Instant::now();
        let eyes = match best_detection(&faces) {
            Some(face) => self.eyes_in(img, face.rect)?,
            None => Vec::new(),
        };
        elapsed.eye_scan = millis(t);
        Ok(FrameResult {
            frame_id: frame_id.to_string(),
            face_present: !faces.is_empty(),
            eyes_present: !eyes.is_empty(),
            faces,
            eyes,
            elapsed,
        })
    }

    fn sweep(&self, small: &GrayImage, angles: &[f64], timings: &mut StageTimings) -> Result<Vec<TiltHit>, PipelineError> {
        let bounds = small.bounds();
        for &angle in angles {
            if angle == 0.0 {
                let faces = self.scan_faces(small, timings)?;
                if !faces.is_empty() {
                    return Ok(faces.into_iter().map(|d| TiltHit { rotated: d, upright: d }).collect());
                }
                continue;
            }
            let m = rotation_about_center::<T>(small, angle)?;
            let inv = invert(&m)?;
            let rotated = warp_affine(small, &m, small.width(), small.height())?;
            let faces = self.scan_faces(&rotated, timings)?;
            if faces.is_empty() {
                continue;
            }
            return Ok(faces
                .into_iter()
                .map(|d| {
                    let (cx, cy) = index_center(&d.rect);
                    let (ux, uy) = inv.apply(T::of(cx), T::of(cy));
                    let rect = box_at((ux.to_f64_lossy(), uy.to_f64_lossy()), d.rect.w, d.rect.h, bounds);
                    TiltHit { rotated: Detection { angle_context: angle, ..d }, upright: Detection { rect, angle_context: angle, ..d } }
                })
                .collect());
        }
        Ok(Vec::new())
    }

    /// Faces found by the rotation sweep (first angle with a hit wins), in
    /// full-resolution upright coordinates.
    pub fn detect_tilted(&self, img: &GrayImage) -> Result<Vec<Detection>, PipelineError> {
        self.check_size(img)?;
        let small = downsample(img, self.config.sf)?;
        let mut timings = StageTimings::default();
        Ok(self
            .sweep(&small, &self.config.tilt_angles, &mut timings)?
            .iter()
            .map(|hit| remap_detection(&hit.upright, self.config.sf, img.width(), img.height()))
            .collect())
    }

    /// Upright pipeline, falling back to the rotation sweep when no upright
    /// face is found. Eyes of a tilted face are searched in the frame rotated
    /// by the same angle and mapped back into the upright face box.
    pub fn detect_frame_with_tilt(&self, frame_id: &str, img: &GrayImage) -> Result<FrameResult, PipelineError> {
        let mut result = self.detect_frame(frame_id, img)?;
        if result.face_present {
            return Ok(result);
        }
        let t = Instant::now();
        let small = downsample(img, self.config.sf)?;
        let rest: Vec<f64> = self.config.tilt_angles.iter().copied().filter(|&a| a != 0.0).collect();
        let mut scratch = StageTimings::default();
        let hits = self.sweep(&small, &rest, &mut scratch)?;
        let (w, h) = (img.width(), img.height());
        let faces: Vec<Detection> = hits.iter().map(|hit| remap_detection(&hit.upright, self.config.sf, w, h)).collect();

        let mut eyes = Vec::new();
        let best = hits
            .iter()
            .zip(&faces)
            .min_by(|(_, a), (_, b)| {
                b.score.cmp(&a.score).then(b.rect.area().cmp(&a.rect.area())).then((a.rect.y, a.rect.x).cmp(&(b.rect.y, b.rect.x)))
            });
        if let Some((hit, face)) = best {
            let m = rotation_about_center::<T>(img, hit.rotated.angle_context)?;
            let inv = invert(&m)?;
            let rotated = warp_affine(img, &m, w, h)?;
            let face_rot = remap_detection(&hit.rotated, self.config.sf, w, h);
            for e in self.eyes_in(&rotated, face_rot.rect)? {
                let (cx, cy) = index_center(&e.rect);
                let (ux, uy) = inv.apply(T::of(cx), T::of(cy));
                let rect = box_at((ux.to_f64_lossy(), uy.to_f64_lossy()), e.rect.w, e.rect.h, face.rect);
                eyes.push(Detection { rect, angle_context: hit.rotated.angle_context, ..e });
            }
        }
        result.elapsed.tilt_extra = millis(t);
        result.face_present = !faces.is_empty();
        result.eyes_present = !eyes.is_empty();
        result.faces = faces;
        result.eyes = eyes;
        Ok(result)
    }
}
