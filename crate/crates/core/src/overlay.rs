//! Detection overlays: box outlines and a direction arrow drawn on a copy of
//! the frame.

use std::path::Path;

use crate::attention::Direction;
use crate::detect::DetectionKind;
use crate::image::{BBox, Rgb, RgbImage};
use crate::pipeline::DetectionReport;
use crate::pnm::save_ppm;
use crate::Result;

pub const FACE_COLOR: Rgb = [0, 255, 0];
pub const HEAD_COLOR: Rgb = [255, 0, 0];
pub const LINE_WIDTH: usize = 2;

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb) {
    if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
        *img.get_mut(x as usize, y as usize) = c;
    }
}

fn outline(img: &mut RgbImage, b: &BBox, c: Rgb) {
    let (x0, y0, x1, y1) = (b.x0 as i64, b.y0 as i64, b.x1 as i64, b.y1 as i64);
    for t in 0..LINE_WIDTH as i64 {
        for x in x0..=x1 {
            put(img, x, y0 + t, c);
            put(img, x, y1 - t, c);
        }
        for y in y0..=y1 {
            put(img, x0 + t, y, c);
            put(img, x1 - t, y, c);
        }
    }
}

/// Horizontal arrow from `(cx, cy)` pointing toward `dir`, with a head of
/// two diagonal strokes.
fn arrow(img: &mut RgbImage, (cx, cy): (f64, f64), dir: Direction, len: i64, c: Rgb) {
    let (cx, cy) = (cx.round() as i64, cy.round() as i64);
    let s = match dir {
        Direction::Left => -1,
        Direction::Right => 1,
    };
    for t in 0..=len {
        for w in 0..LINE_WIDTH as i64 {
            put(img, cx + s * t, cy + w, c);
        }
    }
    let tip = cx + s * len;
    for d in 1..=len / 3 {
        for w in 0..LINE_WIDTH as i64 {
            put(img, tip - s * d, cy - d + w, c);
            put(img, tip - s * d, cy + d + w, c);
        }
    }
}

/// Draws every detection in order, so later ones cover earlier ones.
pub fn draw_overlay(img: &RgbImage, detections: &[DetectionReport]) -> RgbImage {
    let mut out = img.clone();
    for d in detections {
        let c = match d.kind {
            DetectionKind::Face => FACE_COLOR,
            DetectionKind::BackOfHead => HEAD_COLOR,
        };
        outline(&mut out, &d.bbox, c);
        if let Some(dir) = d.direction {
            let len = (d.bbox.width().min(d.bbox.height()) as i64 / 4).clamp(3, 24);
            arrow(&mut out, d.centroid, dir, len, c);
        }
    }
    out
}

pub fn save_overlay(img: &RgbImage, detections: &[DetectionReport], path: impl AsRef<Path>) -> Result<()> {
    save_ppm(&draw_overlay(img, detections), path)
}
