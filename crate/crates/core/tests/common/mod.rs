#![allow(dead_code)]

use std::path::PathBuf;

use haarsf::cascade::{normalization_rect, parse_cascade, Cascade};
use haarsf::image::{load_image, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    repo_root().join("fixtures").join(rel)
}

pub fn frontal_face() -> Cascade<f64> {
    haarsf::cascade::load_cascade(fixture("cascades/haarcascade_frontalface_default.xml")).unwrap()
}

pub fn eye() -> Cascade<f64> {
    haarsf::cascade::load_cascade(fixture("cascades/haarcascade_eye.xml")).unwrap()
}

pub fn frame(id: &str) -> GrayImage {
    load_image(fixture(&format!("eval/frames/{id}.png"))).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen())
}

pub fn naive_sum(img: &GrayImage, x: u32, y: u32, w: u32, h: u32) -> u64 {
    let mut s = 0u64;
    for yy in y..y + h {
        for xx in x..x + w {
            s += u64::from(img.get(xx, yy));
        }
    }
    s
}

pub fn naive_sq_sum(img: &GrayImage, x: u32, y: u32, w: u32, h: u32) -> u64 {
    let mut s = 0u64;
    for yy in y..y + h {
        for xx in x..x + w {
            s += u64::from(img.get(xx, yy)).pow(2);
        }
    }
    s
}

fn round(v: f64) -> u32 {
    (v + 0.5).floor() as u32
}

/// Stages passed by the window at (x, y) for the base window scaled by
/// `scale`, evaluated straight from pixel loops.
pub fn naive_depth(c: &Cascade<f64>, img: &GrayImage, x: u32, y: u32, scale: f64) -> usize {
    let (ww, wh) = (round(f64::from(c.window_w) * scale), round(f64::from(c.window_h) * scale));
    let norm = normalization_rect(c.window_w, c.window_h, scale);
    let (nx, ny) = (x + norm.x, y + norm.y);
    let n = norm.area() as f64;
    let s = naive_sum(img, nx, ny, norm.w, norm.h) as f64;
    let s2 = naive_sq_sum(img, nx, ny, norm.w, norm.h) as f64;
    let nf = (n * s2 - s * s).max(0.0).sqrt().max(n);
    for (depth, stage) in c.stages.iter().enumerate() {
        let mut total = 0.0;
        for weak in &stage.classifiers {
            let rects: Vec<(u32, u32, u32, u32)> = weak
                .feature
                .rects
                .iter()
                .map(|r| {
                    let rx = round(f64::from(r.rect.x) * scale).min(ww - 1);
                    let ry = round(f64::from(r.rect.y) * scale).min(wh - 1);
                    let rw = round(f64::from(r.rect.w) * scale).clamp(1, ww - rx);
                    let rh = round(f64::from(r.rect.h) * scale).clamp(1, wh - ry);
                    (rx, ry, rw, rh)
                })
                .collect();
            let area = |i: usize| f64::from(rects[i].2) * f64::from(rects[i].3);
            let mut weights: Vec<f64> = weak.feature.rects.iter().map(|r| r.weight).collect();
            weights[0] = -(1..rects.len()).map(|i| weights[i] * area(i)).sum::<f64>() / area(0);
            let value: f64 = rects
                .iter()
                .zip(&weights)
                .map(|(&(rx, ry, rw, rh), w)| w * naive_sum(img, x + rx, y + ry, rw, rh) as f64)
                .sum();
            total += if value < weak.threshold * nf { weak.left_val } else { weak.right_val };
        }
        if total < stage.threshold {
            return depth;
        }
    }
    c.stages.len()
}

/// Two stumps looking for a bright horizontal band across the middle third
/// of a 24x24 window, with a brighter left half as a second cue.
pub const BAND_CASCADE: &str = "\
# test cascade
CASCADE band 24 24 1
STAGE 2 1.5
STUMP 0.02 0 1 2
RECT 0 0 24 24 -1
RECT 0 8 24 8 3
STUMP -0.01 0 1 2
RECT 0 0 24 24 -1
RECT 0 0 12 24 2
";

pub fn band_cascade() -> Cascade<f64> {
    parse_cascade(BAND_CASCADE).unwrap()
}

/// A frame with bright horizontal bands at a few places on a noisy
/// background, so the band cascade fires at some but not all windows.
pub fn banded_image(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    let bands: Vec<(u32, u32)> = (0..3).map(|_| (rng.gen_range(0..h), rng.gen_range(4..12))).collect();
    let noise: Vec<u8> = (0..w * h).map(|_| rng.gen_range(0..40)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let lit = bands.iter().any(|&(b, t)| y >= b && y < b + t);
        let base = if lit { 180 } else { 60 } + if x < w / 2 { 10 } else { 0 };
        base + noise[(y * w + x) as usize]
    })
}
