use super::{GrayImage, ImageError};
use crate::scalar::Real;

/// Row-major 2x3 affine map: `x' = a x + b y + tx`, `y' = c x + d y + ty`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMatrix<T> {
    pub a: T,
    pub b: T,
    pub tx: T,
    pub c: T,
    pub d: T,
    pub ty: T,
}

impl<T: Real> AffineMatrix<T> {
    pub fn identity() -> Self {
        Self { a: T::one(), b: T::zero(), tx: T::zero(), c: T::zero(), d: T::one(), ty: T::zero() }
    }

    pub fn coefficients(&self) -> [T; 6] {
        [self.a, self.b, self.tx, self.c, self.d, self.ty]
    }

    #[inline]
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (self.a * x + self.b * y + self.tx, self.c * x + self.d * y + self.ty)
    }

    pub fn determinant(&self) -> T {
        self.a * self.d - self.b * self.c
    }
}

pub fn invert<T: Real>(m: &AffineMatrix<T>) -> Result<AffineMatrix<T>, ImageError> {
    let det = m.determinant();
    if det == T::zero() || !det.is_finite() {
        return Err(ImageError::SingularMatrix);
    }
    let a = m.d / det;
    let b = -m.b / det;
    let c = -m.c / det;
    let d = m.a / det;
    Ok(AffineMatrix { a, b, tx: -(a * m.tx + b * m.ty), c, d, ty: -(c * m.tx + d * m.ty) })
}

/// `(cos, sin)` of an angle in degrees, exact at multiples of 90°.
fn cos_sin_degrees<T: Real>(angle: T) -> (T, T) {
    let quarter = angle / T::of(90.0);
    if quarter.fract() == T::zero() {
        let k = quarter.to_i64().unwrap_or(0).rem_euclid(4);
        let (c, s) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k as usize];
        return (T::of(c), T::of(s));
    }
    let r = angle.to_radians();
    (r.cos(), r.sin())
}

/// Rotation by `angle` degrees about `center` with uniform `scale`.
///
/// Positive angles are counter-clockwise in math axes, i.e. clockwise on
/// screen where y grows downwards. The map is
/// `translate(center) ∘ scale ∘ rotate ∘ translate(-center)`.
pub fn rotation_matrix<T: Real>(center: (T, T), angle: T, scale: T) -> Result<AffineMatrix<T>, ImageError> {
    if scale <= T::zero() || !scale.is_finite() {
        return Err(ImageError::InvalidScale(format!("rotation scale must be > 0, got {scale}")));
    }
    let (cos, sin) = cos_sin_degrees(angle);
    let alpha = scale * cos;
    let beta = scale * sin;
    let (cx, cy) = center;
    let one = T::one();
    Ok(AffineMatrix {
        a: alpha,
        b: beta,
        tx: (one - alpha) * cx - beta * cy,
        c: -beta,
        d: alpha,
        ty: beta * cx + (one - alpha) * cy,
    })
}

/// Warp `img` forward through `m` into an `out_w` x `out_h` canvas.
///
/// Each output pixel samples the source at its inverse-mapped location with
/// bilinear interpolation; neighbours outside the source read as 0.
pub fn warp_affine<T: Real>(img: &GrayImage, m: &AffineMatrix<T>, out_w: u32, out_h: u32) -> Result<GrayImage, ImageError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::Dimensions { width: out_w, height: out_h, len: 0 });
    }
    let inv = invert(m)?;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px = |x: i64, y: i64| -> T {
        if x >= 0 && y >= 0 && x < w && y < h {
            T::of(f64::from(img.get(x as u32, y as u32)))
        } else {
            T::zero()
        }
    };
    let half = T::of(0.5);
    let max = T::of(255.0);
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for oy in 0..out_h {
        for ox in 0..out_w {
            let (sx, sy) = inv.apply(T::of(f64::from(ox)), T::of(f64::from(oy)));
            let (fx0, fy0) = (sx.floor(), sy.floor());
            let (x0, y0) = (fx0.to_i64().unwrap_or(i64::MIN / 2), fy0.to_i64().unwrap_or(i64::MIN / 2));
            if x0 < -1 || y0 < -1 || x0 >= w || y0 >= h {
                data.push(0);
                continue;
            }
            let (fx, fy) = (sx - fx0, sy - fy0);
            let one = T::one();
            let top = px(x0, y0) * (one - fx) + px(x0 + 1, y0) * fx;
            let bottom = px(x0, y0 + 1) * (one - fx) + px(x0 + 1, y0 + 1) * fx;
            let v = top * (one - fy) + bottom * fy;
            data.push((v + half).floor().max(T::zero()).min(max).to_u8().unwrap_or(0));
        }
    }
    GrayImage::new(out_w, out_h, data)
}
