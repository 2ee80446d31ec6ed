//! Reference implementations shared by the integration and acceptance
//! tests. Each is written for clarity, not speed, and shares no code with
//! the library.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use amfm_core::attention::Direction::{self, Left, Right};
use amfm_core::detect::Label;
use amfm_core::BinaryImage;

/// Tries every level and keeps the first with the largest between-class
/// variance `(n1 s0 - n0 s1)^2 / (n0 n1)`.
pub fn otsu_oracle(px: &[u8]) -> u8 {
    let distinct: BTreeSet<u8> = px.iter().copied().collect();
    if distinct.len() == 1 {
        return px[0];
    }
    let mut best: Option<(u8, i128, i128)> = None;
    for t in 0..=255u8 {
        let (mut n0, mut s0, mut n1, mut s1) = (0i128, 0i128, 0i128, 0i128);
        for &p in px {
            if p <= t {
                n0 += 1;
                s0 += p as i128;
            } else {
                n1 += 1;
                s1 += p as i128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let num = (n1 * s0 - n0 * s1).pow(2);
        let den = n0 * n1;
        if best.is_none_or(|(_, bn, bd)| num * bd > bn * den) {
            best = Some((t, num, den));
        }
    }
    best.unwrap().0
}

/// The literal scan: count every window pixel by pixel, keep the first
/// strict maximum in raster order.
pub fn density_oracle(img: &BinaryImage, s: usize) -> (usize, usize, u64) {
    let (w, h) = img.dims();
    let mut best = (0, 0, 0u64);
    let mut first = true;
    for i in 0..=h - s {
        for j in 0..=w - s {
            let mut c = 0u64;
            for y in i..i + s {
                for x in j..j + s {
                    c += *img.get(x, y) as u64;
                }
            }
            if first || c > best.2 {
                best = (i, j, c);
                first = false;
            }
        }
    }
    best
}

/// Breadth-first flood fill seeded in raster order.
pub fn flood_labels(img: &BinaryImage, eight: bool) -> Vec<u32> {
    let (w, h) = img.dims();
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    for sy in 0..h {
        for sx in 0..w {
            if !*img.get(sx, sy) || labels[sy * w + sx] != 0 {
                continue;
            }
            next += 1;
            labels[sy * w + sx] = next;
            let mut q = VecDeque::from([(sx, sy)]);
            while let Some((x, y)) = q.pop_front() {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                            continue;
                        }
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if *img.get(nx, ny) && labels[ny * w + nx] == 0 {
                            labels[ny * w + nx] = next;
                            q.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    labels
}

pub fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// A pixel is in the hull iff it lies in the bounding box and on the inner
/// side of every line through two points that has all points on one side.
pub fn hull_oracle(points: &[(i64, i64)], p: (i64, i64)) -> bool {
    let (xs, ys): (Vec<i64>, Vec<i64>) = points.iter().copied().unzip();
    if p.0 < *xs.iter().min().unwrap()
        || p.0 > *xs.iter().max().unwrap()
        || p.1 < *ys.iter().min().unwrap()
        || p.1 > *ys.iter().max().unwrap()
    {
        return false;
    }
    for &a in points {
        for &b in points {
            if a == b {
                continue;
            }
            if points.iter().all(|&q| cross(a, b, q) >= 0) && cross(a, b, p) < 0 {
                return false;
            }
        }
    }
    true
}

/// Right only strictly above the diagonal `right = left`.
pub fn patch_oracle(left: usize, right: usize) -> Direction {
    if right > left {
        Right
    } else {
        Left
    }
}

pub fn majority_oracle(ul: usize, ur: usize, ll: usize, lr: usize) -> Direction {
    let votes = [
        patch_oracle(ul, ur),
        patch_oracle(ll, lr),
        patch_oracle(ul + ll, ur + lr),
    ];
    let rights = votes.iter().filter(|&&v| v == Right).count();
    if rights >= 2 {
        Right
    } else {
        Left
    }
}

/// The nested flowchart flattened into a table over its three comparisons.
pub fn flowchart_oracle(ul: usize, ur: usize, ll: usize, lr: usize) -> Direction {
    let upper_left = ul >= ur;
    let lower_left = ll >= lr;
    let total_left = ul + ll >= ur + lr;
    match (upper_left, lower_left, total_left) {
        (true, true, _) => Left,
        (true, false, true) => Right,
        (true, false, false) => Left,
        (false, true, true) => Left,
        (false, true, false) => Right,
        (false, false, _) => Right,
    }
}

pub struct SkinOracle {
    pub rgb1: bool,
    pub rgb2: bool,
    pub hsv: bool,
    pub ycbcr: bool,
}

/// Every clause in exact integer arithmetic; the chroma coefficients are
/// scaled by 1000.
pub fn skin_oracle(r: u8, g: u8, b: u8) -> SkinOracle {
    let (r, g, b) = (r as i64, g as i64, b as i64);
    let rg = (r - g).abs();
    let rb = (r - b).abs();
    let first = r > 60 && g > 40 && b > 20 && r > g && r > b && rg > 10 && rg < 45 && rb < rg;
    let second = rg < 45 && rb > 10 && rg < rb;

    let sum = r + g + b;
    let rgb2 =
        sum > 0 && 36 * sum <= 100 * r && 100 * r <= 44 * sum && 20 * sum <= 100 * g && 100 * g <= 36 * sum;

    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let sat_ok = max > 0 && 10 * delta >= max && 10 * delta <= 3 * max;
    let val_ok = (51..=204).contains(&max);

    let cb = -37_797 * r - 74_203 * g + 112_000 * b;
    let cr = 112_000 * r - 93_786 * g - 18_214 * b;
    let ycbcr = (-4_462_500..=1_912_500).contains(&cb) && (1_785_000..=4_335_000).contains(&cr);

    SkinOracle {
        rgb1: first || second,
        rgb2,
        hsv: sat_ok && val_ok,
        ycbcr,
    }
}

/// Majority label of the `k` nearest samples after a full stable sort by
/// squared distance.
pub fn knn_oracle(samples: &[(Label, Vec<u8>)], k: usize, q: &[u8]) -> (Label, usize) {
    let mut ranked: Vec<(i64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, (_, v))| {
            let d: i64 = v.iter().zip(q).map(|(&a, &b)| (a as i64 - b as i64).pow(2)).sum();
            (d, i)
        })
        .collect();
    ranked.sort();
    let faces = ranked[..k]
        .iter()
        .filter(|(_, i)| samples[*i].0 == Label::Face)
        .count();
    if faces * 2 > k {
        (Label::Face, faces)
    } else {
        (Label::NonFace, k - faces)
    }
}
