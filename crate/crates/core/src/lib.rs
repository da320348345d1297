//! Haar-cascade face and eye detection with downsample-and-remap speedup.
//!
//! The core is generic over the scalar type ([`scalar::Real`]); the aliases
//! below fix it to `f64`, which is what the CLI uses.

pub mod cascade;
pub mod eval;
pub mod image;
pub mod pipeline;
pub mod scalar;

pub type Cascade = cascade::Cascade<f64>;
pub type Cascade32 = cascade::Cascade<f32>;
pub type Pipeline = pipeline::Pipeline<f64>;
pub type AffineMatrix = image::AffineMatrix<f64>;
