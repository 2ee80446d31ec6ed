//! Multiscale AM-FM image demodulation and head-direction detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`image`], [`color`], [`pnm`], [`overlay`]: pixel containers, color-space
//!   conversions and portable-anymap I/O.
//! * [`gabor`]: complex Gabor kernels and the 54-filter daisy-petal bank.
//! * [`amfm`]: analytic image, per-channel demodulation, dominant component
//!   analysis and the AM/FM display images.
//! * [`segment`]: Otsu, Canny, hole filling, connected components, convex hull.
//! * [`skin`]: rule-based skin classification.
//! * [`detect`]: KNN face blocks and the back-of-head density detector.
//! * [`attention`]: left/right direction classifiers.
//! * [`pipeline`]: per-frame orchestration and the JSON frame report.
//!
//! With the default `parallel` feature the channel filtering, FFT passes and
//! per-pixel maps run on rayon; without it the same code runs sequentially and
//! produces bit-identical output.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amfm;
pub mod attention;
pub mod bench;
pub mod color;
pub mod detect;
mod error;
pub mod fft;
pub mod gabor;
pub mod image;
pub mod overlay;
mod par;
pub mod phantom;
pub mod pipeline;
pub mod pnm;
pub mod segment;
pub mod skin;

pub use error::{Error, Result};
pub use image::{BBox, BinaryImage, GrayImage, Plane, Rgb, RgbImage};
