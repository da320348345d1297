use super::{GrayImage, ImageError, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralKind {
    Plain,
    Squared,
}

/// Zero-padded summed-area table: `entry(x, y)` is the sum over the source
/// rectangle `[0, x) x [0, y)`, so the table is one larger than the source in
/// each dimension and its first row and column are zero.
///
/// Entries are `u64`, which holds `255² x 2^32` without overflow.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    data: Vec<u64>,
    kind: IntegralKind,
}

impl IntegralImage {
    /// Padded width (source width + 1).
    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Padded height (source height + 1).
    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn kind(&self) -> IntegralKind {
        self.kind
    }

    #[inline]
    pub fn entry(&self, x: u32, y: u32) -> u64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    /// Four-corner sum with no bounds check beyond slice indexing.
    #[inline(always)]
    pub fn sum_unchecked(&self, x: u32, y: u32, w: u32, h: u32) -> u64 {
        let stride = self.width as usize;
        let top = y as usize * stride;
        let bottom = (y + h) as usize * stride;
        let (l, r) = (x as usize, (x + w) as usize);
        // a + d - b - c never goes negative; order the ops so u64 cannot underflow
        (self.data[bottom + r] + self.data[top + l]) - (self.data[top + r] + self.data[bottom + l])
    }
}

impl std::fmt::Debug for IntegralImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IntegralImage({:?}, {}x{})", self.kind, self.width, self.height)
    }
}

fn build(img: &GrayImage, kind: IntegralKind) -> IntegralImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let stride = w + 1;
    let mut data = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut running = 0u64;
        let src = &img.data()[y * w..(y + 1) * w];
        let (above, rest) = data.split_at_mut((y + 1) * stride);
        let above = &above[y * stride..];
        let row = &mut rest[..stride];
        for x in 0..w {
            let p = u64::from(src[x]);
            running += match kind {
                IntegralKind::Plain => p,
                IntegralKind::Squared => p * p,
            };
            row[x + 1] = above[x + 1] + running;
        }
    }
    IntegralImage { width: stride as u32, height: (h + 1) as u32, data, kind }
}

pub fn integral(img: &GrayImage) -> IntegralImage {
    build(img, IntegralKind::Plain)
}

pub fn squared_integral(img: &GrayImage) -> IntegralImage {
    build(img, IntegralKind::Squared)
}

/// Exact sum of the source pixels (or squared pixels) inside `r`.
pub fn rect_sum(ii: &IntegralImage, r: Rect) -> Result<u64, ImageError> {
    if !r.fits_in(ii.width - 1, ii.height - 1) {
        return Err(ImageError::OutOfBounds { rect: r, width: ii.width - 1, height: ii.height - 1 });
    }
    Ok(ii.sum_unchecked(r.x, r.y, r.w, r.h))
}
