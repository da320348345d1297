//! Rotate a frame about its center and report where a box lands.
//!
//!     cargo run --example rotate_frame -- in.png -20 out.png 161,221,157,157
//!
//! The printed box keeps its size and is centred on the rotated center of the
//! input box, clamped to the frame.

use haarsf::image::{load_image, rotation_matrix, save_pgm, warp_affine, encode_png, Rect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [input, angle, output, rest @ ..] = args.as_slice() else {
        return Err("usage: rotate_frame <in> <angle> <out.png|out.pgm> [x,y,w,h]".into());
    };
    let img = load_image(input)?;
    let angle: f64 = angle.parse()?;
    let center = ((f64::from(img.width()) - 1.0) / 2.0, (f64::from(img.height()) - 1.0) / 2.0);
    let m = rotation_matrix(center, angle, 1.0)?;
    let rotated = warp_affine(&img, &m, img.width(), img.height())?;
    if output.ends_with(".pgm") {
        save_pgm(&rotated, output)?;
    } else {
        std::fs::write(output, encode_png(&rotated)?)?;
    }
    if let Some(spec) = rest.first() {
        let v: Vec<u32> = spec.split(',').map(str::parse).collect::<Result<_, _>>()?;
        let [x, y, w, h] = v[..] else { return Err("box must be x,y,w,h".into()) };
        let (cx, cy) = m.apply(f64::from(x) + (f64::from(w) - 1.0) / 2.0, f64::from(y) + (f64::from(h) - 1.0) / 2.0);
        let place = |c: f64, len: u32, span: u32| (c - (f64::from(len) - 1.0) / 2.0 + 0.5).floor().clamp(0.0, f64::from(span - len)) as u32;
        let r = Rect::new(place(cx, w, img.width()), place(cy, h, img.height()), w, h);
        println!("[{}, {}, {}, {}]", r.x, r.y, r.w, r.h);
    }
    Ok(())
}
