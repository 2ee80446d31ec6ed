//! Color-space conversions for 8-bit RGB.

use crate::image::{GrayImage, RgbImage};

/// Hue, saturation and value, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Studio-swing BT.601 luma and chroma: Y in [16, 235], Cb/Cr in [16, 240].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCbCr {
    pub y: f64,
    pub cb: f64,
    pub cr: f64,
}

/// BT.601 luma of one pixel, in [0, 255].
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

pub fn to_gray(img: &RgbImage) -> GrayImage {
    img.map(|&[r, g, b]| luma(r, g, b))
}

/// Replicates a gray image into three identical channels.
pub fn gray_to_rgb(img: &GrayImage) -> RgbImage {
    img.map(|&v| {
        let q = crate::image::quantize(v);
        [q, q, q]
    })
}

/// Hexcone HSV. Achromatic pixels get H = 0 and S = 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> Hsv {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;
    let v = max / 255.0;
    if delta == 0.0 {
        return Hsv { h: 0.0, s: 0.0, v };
    }
    let s = delta / max;
    let sector = if max == rf {
        let h = (gf - bf) / delta;
        if h < 0.0 {
            h + 6.0
        } else {
            h
        }
    } else if max == gf {
        (bf - rf) / delta + 2.0
    } else {
        (rf - gf) / delta + 4.0
    };
    Hsv {
        h: sector / 6.0,
        s,
        v,
    }
}

pub fn rgb_to_ycbcr(r: u8, g: u8, b: u8) -> YCbCr {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    YCbCr {
        y: 16.0 + (65.481 * rf + 128.553 * gf + 24.966 * bf) / 255.0,
        cb: 128.0 + (-37.797 * rf - 74.203 * gf + 112.0 * bf) / 255.0,
        cr: 128.0 + (112.0 * rf - 93.786 * gf - 18.214 * bf) / 255.0,
    }
}
