//! Pixel-level primitives: the grayscale raster, rectangles, scale factors,
//! decoding, downsampling, integral images and affine warps.

mod affine;
mod integral;
mod io;
mod resample;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use affine::{invert, rotation_matrix, warp_affine, AffineMatrix};
pub use integral::{integral, rect_sum, squared_integral, IntegralImage, IntegralKind};
pub use io::{decode_image, encode_png, encode_pgm, load_image, save_pgm};
pub use resample::downsample;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported or malformed image: {0}")]
    Format(String),
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("invalid dimensions {width}x{height} for {len} pixels")]
    Dimensions { width: u32, height: u32, len: usize },
    #[error("rect {rect} is outside a {width}x{height} image")]
    OutOfBounds { rect: Rect, width: u32, height: u32 },
    #[error("affine matrix is singular")]
    SingularMatrix,
}

/// An 8-bit single channel raster stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize {
            return Err(ImageError::Dimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// A `width` x `height` image filled with `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    /// Build an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn crop(&self, r: Rect) -> Result<GrayImage, ImageError> {
        self.check(r)?;
        let mut data = Vec::with_capacity(r.area() as usize);
        for y in r.y..r.y + r.h {
            let start = y as usize * self.width as usize + r.x as usize;
            data.extend_from_slice(&self.data[start..start + r.w as usize]);
        }
        Ok(GrayImage { width: r.w, height: r.h, data })
    }

    /// A copy with the outline of every rect burned in at `value`.
    pub fn with_boxes(&self, rects: &[Rect], thickness: u32, value: u8) -> GrayImage {
        let mut out = self.clone();
        let w = self.width as usize;
        for r in rects {
            let Some(r) = r.clamp_to(self.width, self.height) else { continue };
            let t = thickness.max(1);
            for y in r.y..r.bottom() {
                for x in r.x..r.right() {
                    let edge = x < r.x + t
                        || y < r.y + t
                        || x + t >= r.right()
                        || y + t >= r.bottom();
                    if edge {
                        out.data[y as usize * w + x as usize] = value;
                    }
                }
            }
        }
        out
    }

    pub(crate) fn check(&self, r: Rect) -> Result<(), ImageError> {
        if r.fits_in(self.width, self.height) {
            Ok(())
        } else {
            Err(ImageError::OutOfBounds { rect: r, width: self.width, height: self.height })
        }
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

/// Axis-aligned pixel rectangle `[x, x + w) x [y, y + h)`.
///
/// Serialized as a JSON array `[x, y, w, h]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    #[inline]
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    #[inline]
    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    #[inline]
    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        !self.is_empty()
            && u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Intersection over union; 0 for disjoint or empty rects.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn translate(&self, dx: u32, dy: u32) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    /// Shrink to fit inside a `width` x `height` frame; `None` when nothing
    /// of the rect remains.
    pub fn clamp_to(&self, width: u32, height: u32) -> Option<Rect> {
        if self.x >= width || self.y >= height {
            return None;
        }
        let w = self.w.min(width - self.x);
        let h = self.h.min(height - self.y);
        (w > 0 && h > 0).then(|| Rect::new(self.x, self.y, w, h))
    }

    /// Center in continuous pixel coordinates.
    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.x, self.y, self.w, self.h)
    }
}

impl Serialize for Rect {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rect {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[u32; 4]>::deserialize(d)?;
        Ok(Rect::new(x, y, w, h))
    }
}

/// Ratio of original to downsampled frame size along either axis.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ScaleFactor(f64);

impl ScaleFactor {
    pub const ONE: ScaleFactor = ScaleFactor(1.0);

    pub fn new(value: f64) -> Result<Self, ImageError> {
        if value.is_finite() && value >= 1.0 {
            Ok(Self(value))
        } else {
            Err(ImageError::InvalidScale(format!("SF must be ≥ 1, got {value}")))
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }

    /// The factor as an integer when it is one.
    pub fn as_integer(&self) -> Option<u32> {
        (self.0.fract() == 0.0 && self.0 <= u32::MAX as f64).then_some(self.0 as u32)
    }
}

impl Default for ScaleFactor {
    fn default() -> Self {
        Self::ONE
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "{}", self.0),
        }
    }
}

impl std::str::FromStr for ScaleFactor {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| ImageError::InvalidScale(format!("not a number: {s:?}")))?;
        ScaleFactor::new(v)
    }
}

impl Serialize for ScaleFactor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for ScaleFactor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        ScaleFactor::new(v).map_err(serde::de::Error::custom)
    }
}
