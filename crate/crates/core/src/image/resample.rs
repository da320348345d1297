use super::{GrayImage, ImageError, ScaleFactor};
use crate::scalar::round_half_up;

/// Box-filter downsampling by `sf`.
///
/// Output is `floor(w / sf) x floor(h / sf)`. Integer factors average each
/// `sf x sf` block exactly; fractional factors weight source pixels by their
/// overlap with the output footprint. Means are rounded half-up.
pub fn downsample(img: &GrayImage, sf: ScaleFactor) -> Result<GrayImage, ImageError> {
    let s = sf.value();
    let out_w = (img.width() as f64 / s).floor() as u32;
    let out_h = (img.height() as f64 / s).floor() as u32;
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::InvalidScale(format!(
            "SF {sf} would shrink {}x{} to nothing",
            img.width(),
            img.height()
        )));
    }
    match sf.as_integer() {
        Some(1) => Ok(img.clone()),
        Some(k) => Ok(block_mean(img, k, out_w, out_h)),
        None => Ok(area_weighted(img, s, out_w, out_h)),
    }
}

fn block_mean(img: &GrayImage, k: u32, out_w: u32, out_h: u32) -> GrayImage {
    let src = img.data();
    let stride = img.width() as usize;
    let k = k as usize;
    let n = (k * k) as u64;
    let mut col_sums = vec![0u64; out_w as usize];
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for oy in 0..out_h as usize {
        col_sums.iter_mut().for_each(|c| *c = 0);
        for row in src[oy * k * stride..(oy * k + k) * stride].chunks_exact(stride) {
            for (ox, c) in col_sums.iter_mut().enumerate() {
                *c += row[ox * k..ox * k + k].iter().map(|&p| u64::from(p)).sum::<u64>();
            }
        }
        // floor(sum / n + 1/2) without leaving integers
        data.extend(col_sums.iter().map(|&sum| ((2 * sum + n) / (2 * n)) as u8));
    }
    GrayImage { width: out_w, height: out_h, data }
}

/// Overlap of source cells with each output cell along one axis.
fn axis_weights(s: f64, out_len: u32, src_len: u32) -> Vec<Vec<(usize, f64)>> {
    (0..out_len)
        .map(|o| {
            let lo = o as f64 * s;
            let hi = (lo + s).min(src_len as f64);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src_len as usize);
            (first..last)
                .filter_map(|i| {
                    let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                    (overlap > 0.0).then_some((i, overlap))
                })
                .collect()
        })
        .collect()
}

fn area_weighted(img: &GrayImage, s: f64, out_w: u32, out_h: u32) -> GrayImage {
    let xs = axis_weights(s, out_w, img.width());
    let ys = axis_weights(s, out_h, img.height());
    let norm = s * s;
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for wy in &ys {
        for wx in &xs {
            let mut acc = 0.0;
            for &(sy, fy) in wy {
                for &(sx, fx) in wx {
                    acc += fy * fx * f64::from(img.get(sx as u32, sy as u32));
                }
            }
            data.push(round_half_up(acc / norm).clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage { width: out_w, height: out_h, data }
}
