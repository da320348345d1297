use serde::{Deserialize, Serialize};

use super::CascadeError;
use crate::image::{Rect, ScaleFactor};
use crate::scalar::Real;

/// One rectangle of a Haar feature with its signed weight, in base-window
/// coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedRect<T> {
    pub rect: Rect,
    pub weight: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HaarFeature<T> {
    pub rects: Vec<WeightedRect<T>>,
    /// 45° features are not supported; kept so parsers can report them.
    pub tilted: bool,
}

/// Depth-1 decision tree over one feature.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakClassifier<T> {
    pub feature: HaarFeature<T>,
    pub threshold: T,
    pub left_val: T,
    pub right_val: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage<T> {
    pub classifiers: Vec<WeakClassifier<T>>,
    pub threshold: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cascade<T> {
    pub name: String,
    pub window_w: u32,
    pub window_h: u32,
    pub stages: Vec<Stage<T>>,
}

impl<T: Real> HaarFeature<T> {
    /// `Σ weight · area`; zero for a balanced feature.
    pub fn weighted_area(&self) -> T {
        self.rects
            .iter()
            .fold(T::zero(), |acc, r| acc + r.weight * T::of(r.rect.area() as f64))
    }

    fn validate(&self, window_w: u32, window_h: u32) -> Result<(), CascadeError> {
        if self.tilted {
            return Err(CascadeError::Unsupported("tilted (45°) Haar feature".into()));
        }
        if !(2..=3).contains(&self.rects.len()) {
            return Err(CascadeError::Validation(format!(
                "feature has {} rects, expected 2 or 3",
                self.rects.len()
            )));
        }
        for r in &self.rects {
            if !r.rect.fits_in(window_w, window_h) {
                return Err(CascadeError::Validation(format!(
                    "rect {} outside the {window_w}x{window_h} base window",
                    r.rect
                )));
            }
        }
        let magnitude = self
            .rects
            .iter()
            .fold(T::zero(), |acc, r| acc + (r.weight * T::of(r.rect.area() as f64)).abs());
        if self.weighted_area().abs() > T::of(1e-6) * magnitude {
            return Err(CascadeError::Validation(format!(
                "feature weights do not balance: Σ weight·area = {}",
                self.weighted_area()
            )));
        }
        Ok(())
    }
}

impl<T: Real> Cascade<T> {
    /// Validate and assemble a cascade.
    pub fn new(name: impl Into<String>, window_w: u32, window_h: u32, stages: Vec<Stage<T>>) -> Result<Self, CascadeError> {
        let cascade = Cascade { name: name.into(), window_w, window_h, stages };
        cascade.validate()?;
        Ok(cascade)
    }

    pub fn validate(&self) -> Result<(), CascadeError> {
        if self.window_w < 4 || self.window_h < 4 {
            return Err(CascadeError::Validation(format!(
                "base window {}x{} is smaller than 4x4",
                self.window_w, self.window_h
            )));
        }
        if self.stages.is_empty() {
            return Err(CascadeError::Validation("cascade has no stages".into()));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            if stage.classifiers.is_empty() {
                return Err(CascadeError::Validation(format!("stage {i} is empty")));
            }
            for weak in &stage.classifiers {
                weak.feature.validate(self.window_w, self.window_h)?;
            }
        }
        Ok(())
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn feature_count(&self) -> usize {
        self.stages.iter().map(|s| s.classifiers.len()).sum()
    }

    /// The same model in another float width.
    pub fn cast<U: Real>(&self) -> Cascade<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        Cascade {
            name: self.name.clone(),
            window_w: self.window_w,
            window_h: self.window_h,
            stages: self
                .stages
                .iter()
                .map(|s| Stage {
                    threshold: c(s.threshold),
                    classifiers: s
                        .classifiers
                        .iter()
                        .map(|w| WeakClassifier {
                            feature: HaarFeature {
                                tilted: w.feature.tilted,
                                rects: w
                                    .feature
                                    .rects
                                    .iter()
                                    .map(|r| WeightedRect { rect: r.rect, weight: c(r.weight) })
                                    .collect(),
                            },
                            threshold: c(w.threshold),
                            left_val: c(w.left_val),
                            right_val: c(w.right_val),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// A box reported by the detector.
///
/// Before grouping `score` is the number of stages passed and `neighbors` is
/// 0. After grouping both equal the number of raw windows merged into the box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub rect: Rect,
    pub score: u32,
    #[serde(default)]
    pub neighbors: u32,
    pub sf_context: ScaleFactor,
    pub angle_context: f64,
}

impl Detection {
    pub fn raw(rect: Rect, depth: u32) -> Self {
        Detection { rect, score: depth, neighbors: 0, sf_context: ScaleFactor::ONE, angle_context: 0.0 }
    }

    /// How many raw windows this detection stands for.
    pub fn weight(&self) -> u32 {
        self.neighbors.max(1)
    }
}
