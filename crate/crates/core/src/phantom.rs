//! Synthetic test images with known structure: plane waves, AM-FM chirps,
//! striped dark heads and schematic faces.

use std::f64::consts::PI;

use crate::image::{BBox, GrayImage, Plane, Rgb, RgbImage};

pub const BACKGROUND: Rgb = [200, 200, 200];
/// Dark but still inside the skin rules, so a bright background stays
/// bright in the FM image while the face interior does not wash out.
pub const SKIN: Rgb = [70, 54, 50];
pub const FEATURE: Rgb = [0, 0, 0];
pub const OUTLINE: Rgb = [0, 0, 0];
/// Default outline thickness of a schematic face, pixels.
pub const OUTLINE_WIDTH: f64 = 4.0;
pub const HAIR: Rgb = [10, 8, 8];
pub const HAIR_STRIPE: Rgb = [250, 240, 230];

/// Nearest frequency to `omega` that completes a whole number of cycles over
/// `n` samples.
pub fn bin_align(omega: f64, n: usize) -> f64 {
    let step = 2.0 * PI / n as f64;
    (omega / step).round() * step
}

/// `offset + amplitude * cos(u x + v y + phase)`.
pub fn plane_wave(w: usize, h: usize, u: f64, v: f64, amplitude: f64, offset: f64, phase: f64) -> GrayImage {
    Plane::from_fn(w, h, |x, y| {
        offset + amplitude * (u * x as f64 + v * y as f64 + phase).cos()
    })
}

/// A single AM-FM component sampled on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chirp {
    /// Carrier frequency at the image centre, rad/sample.
    pub u0: f64,
    pub v0: f64,
    /// Change of the horizontal frequency per sample across the image.
    pub sweep: f64,
    pub amplitude: f64,
    /// Relative depth of the slow amplitude modulation.
    pub am_depth: f64,
}

impl Chirp {
    /// Amplitude and phase at `(x, y)`.
    pub fn components(&self, w: usize, h: usize, x: f64, y: f64) -> (f64, f64) {
        let dx = x - (w as f64 - 1.0) / 2.0;
        let dy = y - (h as f64 - 1.0) / 2.0;
        let a = self.amplitude
            * (1.0 + self.am_depth * (2.0 * PI * dx / w as f64).cos() * (2.0 * PI * dy / h as f64).cos());
        let phi = self.u0 * dx + self.v0 * dy + 0.5 * self.sweep * dx * dx;
        (a, phi)
    }

    pub fn render(&self, w: usize, h: usize) -> GrayImage {
        Plane::from_fn(w, h, |x, y| {
            let (a, phi) = self.components(w, h, x as f64, y as f64);
            a * phi.cos()
        })
    }
}

/// A bright frame with a dark square of hair: 1-px bright strands every
/// `period` columns. Returns the frame and the square's box.
pub fn head_phantom(
    w: usize,
    h: usize,
    center: (usize, usize),
    side: usize,
    period: usize,
) -> (RgbImage, BBox) {
    let bbox = BBox::from_origin(center.0 - side / 2, center.1 - side / 2, side, side);
    let img = Plane::from_fn(w, h, |x, y| {
        if !bbox.contains(x as f64, y as f64) {
            BACKGROUND
        } else if (x - bbox.x0).is_multiple_of(period) {
            HAIR_STRIPE
        } else {
            HAIR
        }
    });
    (img, bbox)
}

/// Geometry of a schematic face: an outlined skin ellipse with eye, nose
/// and mouth bars displaced horizontally from the ellipse centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceLayout {
    pub center: (f64, f64),
    pub radii: (f64, f64),
    /// Horizontal displacement of the features as a fraction of the x
    /// radius; negative moves them left.
    pub feature_shift: f64,
    /// Thickness of the dark rim along the ellipse, pixels; 0 for none.
    pub outline: f64,
}

impl FaceLayout {
    pub fn new(center: (f64, f64), radii: (f64, f64), feature_shift: f64) -> Self {
        FaceLayout {
            center,
            radii,
            feature_shift,
            outline: OUTLINE_WIDTH,
        }
    }

    pub fn bbox(&self) -> BBox {
        let (cx, cy) = self.center;
        let (rx, ry) = self.radii;
        BBox::new(
            (cx - rx).ceil() as usize,
            (cy - ry).ceil() as usize,
            (cx + rx).floor() as usize,
            (cy + ry).floor() as usize,
        )
    }

    pub fn in_ellipse(&self, x: f64, y: f64) -> bool {
        let dx = (x - self.center.0) / self.radii.0;
        let dy = (y - self.center.1) / self.radii.1;
        dx * dx + dy * dy <= 1.0
    }

    pub fn in_outline(&self, x: f64, y: f64) -> bool {
        if !self.in_ellipse(x, y) {
            return false;
        }
        let dx = (x - self.center.0) / (self.radii.0 - self.outline);
        let dy = (y - self.center.1) / (self.radii.1 - self.outline);
        dx * dx + dy * dy > 1.0
    }

    pub fn in_feature(&self, x: f64, y: f64) -> bool {
        let (rx, ry) = self.radii;
        // coordinates relative to the displaced feature centre, in radii
        let fx = (x - self.center.0) / rx - self.feature_shift;
        let fy = (y - self.center.1) / ry;
        let bar = |x0: f64, x1: f64, y0: f64, y1: f64| fx >= x0 && fx <= x1 && fy >= y0 && fy <= y1;
        bar(-0.55, -0.15, -0.35, -0.22)
            || bar(0.15, 0.55, -0.35, -0.22)
            || bar(-0.06, 0.06, -0.15, 0.2)
            || bar(-0.3, 0.3, 0.38, 0.48)
    }
}

/// Renders faces onto a uniform background; features are clipped to their
/// ellipse.
pub fn face_phantom(w: usize, h: usize, background: Rgb, faces: &[FaceLayout]) -> RgbImage {
    Plane::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        for f in faces {
            if f.in_outline(xf, yf) {
                return OUTLINE;
            }
            if f.in_ellipse(xf, yf) {
                return if f.in_feature(xf, yf) { FEATURE } else { SKIN };
            }
        }
        background
    })
}

/// Fills `bbox` with `color`.
pub fn paint_box(img: &mut RgbImage, bbox: BBox, color: Rgb) {
    for y in bbox.y0..=bbox.y1.min(img.height() - 1) {
        for x in bbox.x0..=bbox.x1.min(img.width() - 1) {
            *img.get_mut(x, y) = color;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_frequency_is_periodic() {
        let u = bin_align(1.0, 64);
        let img = plane_wave(64, 8, u, 0.0, 1.0, 0.0, 0.3);
        let next = (u * 64.0 + 0.3).cos();
        assert!((next - *img.get(0, 0)).abs() < 1e-12);
    }

    #[test]
    fn head_layout() {
        let (img, b) = head_phantom(100, 100, (50, 50), 40, 4);
        assert_eq!(b, BBox::new(30, 30, 69, 69));
        assert_eq!(*img.get(30, 40), HAIR_STRIPE);
        assert_eq!(*img.get(31, 40), HAIR);
        assert_eq!(*img.get(29, 40), BACKGROUND);
    }

    #[test]
    fn shifted_features_sit_left() {
        let f = FaceLayout::new((50.0, 50.0), (30.0, 40.0), -0.2);
        let img = face_phantom(100, 100, BACKGROUND, &[f]);
        let (mut left, mut right) = (0, 0);
        for (x, y) in (0..100).flat_map(|y| (0..100).map(move |x| (x, y))) {
            if *img.get(x, y) == FEATURE {
                if x < 50 {
                    left += 1
                } else {
                    right += 1
                }
            }
        }
        assert!(left > right && right > 0);
        assert_eq!(f.bbox(), BBox::new(20, 10, 80, 90));
        assert_eq!(*img.get(21, 50), OUTLINE);
        assert_eq!(*img.get(50, 30), SKIN);
        assert!(crate::skin::skin_pixel(SKIN[0], SKIN[1], SKIN[2]));
    }
}
