//! Binary PGM (P5) read/write and 8-bit PNG read.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageEncoder};

use super::{GrayImage, ImageError};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Read a P5 PGM (maxval 255) or an 8-bit gray/RGB PNG. Color is reduced to
/// BT.601 luma, rounded half-up.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageError::Io { path: path.to_owned(), source })?;
    decode_image(&bytes)
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else {
        Err(ImageError::Format("unrecognized magic (expected P5 PGM or PNG)".into()))
    }
}

/// `P5\n<w> <h>\n255\n` followed by the raw rows.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| ImageError::Io { path: path.to_owned(), source })
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(img.data(), img.width(), img.height(), image::ExtendedColorType::L8)
        .map_err(|e| ImageError::Format(e.to_string()))?;
    Ok(out)
}

/// BT.601 luma with integer round-half-up.
#[inline]
fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Format(format!("PGM header: bad {what}")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(ImageError::Format(format!("PGM maxval {maxval} unsupported (only 255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(ImageError::Format("PGM header not terminated".into())),
    }
    let payload = &bytes[cur.pos..];
    let expected = width as usize * height as usize;
    if payload.len() != expected {
        return Err(ImageError::Format(format!(
            "PGM declares {width}x{height} ({expected} bytes) but carries {} bytes",
            payload.len()
        )));
    }
    GrayImage::new(width, height, payload.to_vec())
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let dynamic = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| ImageError::Format(e.to_string()))?;
    let (width, height) = (dynamic.width(), dynamic.height());
    let data = match dynamic {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(ImageError::Format(format!(
                "PNG color type {:?} unsupported (8-bit gray or RGB only)",
                other.color()
            )))
        }
    };
    GrayImage::new(width, height, data)
}
