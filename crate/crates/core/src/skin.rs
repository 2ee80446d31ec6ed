//! Rule-based skin classification: two RGB rules, an HSV rule and a YCbCr
//! rule, all of which must hold.

use crate::color::{rgb_to_hsv, rgb_to_ycbcr};
use crate::image::{BBox, BinaryImage, RgbImage};
use crate::segment::{bounding_boxes, connected_components, Connectivity};

/// Default speckle filter for [`skin_boxes`], in pixels.
pub const DEFAULT_MIN_SKIN_AREA: usize = 100;

pub fn rgb_rule_1(r: u8, g: u8, b: u8) -> bool {
    let (r, g, b) = (r as i32, g as i32, b as i32);
    let rg = (r - g).abs();
    let rb = (r - b).abs();
    let uniform = r > 60 && g > 40 && b > 20 && r > g && r > b && 10 < rg && rg < 45 && rb < rg;
    let lateral = rg < 45 && rb > 10 && rg < rb;
    uniform || lateral
}

/// Normalized red and green chromaticities; black has none and fails.
pub fn rgb_rule_2(r: u8, g: u8, b: u8) -> bool {
    let sum = r as f64 + g as f64 + b as f64;
    if sum == 0.0 {
        return false;
    }
    let rn = r as f64 / sum;
    let gn = g as f64 / sum;
    (0.36..=0.44).contains(&rn) && (0.2..=0.36).contains(&gn)
}

/// The hue bound spans the whole [0, 1] range, so only S and V constrain.
pub fn hsv_rule(r: u8, g: u8, b: u8) -> bool {
    let hsv = rgb_to_hsv(r, g, b);
    (0.0..=1.0).contains(&hsv.h) && (0.1..=0.3).contains(&hsv.s) && (0.2..=0.8).contains(&hsv.v)
}

pub fn ycbcr_rule(r: u8, g: u8, b: u8) -> bool {
    let c = rgb_to_ycbcr(r, g, b);
    (110.5..=135.5).contains(&c.cb) && (135.0..=145.0).contains(&c.cr)
}

pub fn skin_pixel(r: u8, g: u8, b: u8) -> bool {
    rgb_rule_1(r, g, b) && rgb_rule_2(r, g, b) && hsv_rule(r, g, b) && ycbcr_rule(r, g, b)
}

pub fn skin_mask(img: &RgbImage) -> BinaryImage {
    img.map(|&[r, g, b]| skin_pixel(r, g, b))
}

/// Boxes of the 8-connected skin regions with at least `min_area` pixels.
pub fn skin_boxes(mask: &BinaryImage, min_area: usize) -> Vec<BBox> {
    let labels = connected_components(mask, Connectivity::Eight);
    let areas = labels.areas();
    bounding_boxes(&labels)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| areas[i + 1] >= min_area)
        .map(|(_, b)| b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Plane;

    #[test]
    fn reference_pixels() {
        assert!(!skin_pixel(128, 128, 128));
        assert!(!rgb_rule_1(128, 128, 128));
        assert!(!skin_pixel(255, 0, 0));
        assert!(!rgb_rule_1(255, 0, 0));
        assert!(skin_pixel(170, 140, 120));
        assert!(!rgb_rule_2(0, 0, 0));
    }

    #[test]
    fn hsv_rule_is_saturation_and_value() {
        // same S and V, hue rotated far from skin tones
        assert!(hsv_rule(170, 140, 120));
        assert!(hsv_rule(120, 140, 170));
        assert!(!hsv_rule(170, 50, 50)); // S too high
        assert!(!hsv_rule(250, 240, 230)); // V too high
    }

    #[test]
    fn masks_and_boxes() {
        let skin = Plane::filled(6, 4, [170u8, 140, 120]);
        assert_eq!(skin_mask(&skin).count(), 24);
        let gray = Plane::filled(6, 4, [90u8, 90, 90]);
        assert_eq!(skin_mask(&gray).count(), 0);

        let mut m = Plane::filled(60, 60, false);
        assert!(skin_boxes(&m, 100).is_empty());
        for y in 10..30 {
            for x in 25..45 {
                *m.get_mut(x, y) = true;
            }
        }
        for x in 0..5 {
            *m.get_mut(x, 55) = true;
        }
        assert_eq!(skin_boxes(&m, 100), vec![BBox::new(25, 10, 44, 29)]);
        assert_eq!(skin_boxes(&m, 1).len(), 2);
    }
}
