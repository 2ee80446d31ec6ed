//! Binary-image primitives: Otsu thresholding, Canny edges, hole filling,
//! connected components, convex hulls and bounding boxes.

use std::collections::VecDeque;

use crate::image::{quantize, BBox, BinaryImage, GrayImage, Plane};
use crate::{par, Error, Result};

/// 256-bin histogram of the rounded intensities.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.as_slice() {
        hist[quantize(v) as usize] += 1;
    }
    hist
}

/// Otsu level over a 256-bin histogram.
///
/// Returns the smallest level maximizing the between-class variance, where
/// class 0 is `bin <= level`. A single-valued image returns that value.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    otsu_from_histogram(&histogram(img))
}

pub fn otsu_from_histogram(hist: &[u64; 256]) -> u8 {
    let occupied: Vec<usize> = (0..256).filter(|&i| hist[i] > 0).collect();
    match occupied.as_slice() {
        [] => return 0,
        [only] => return *only as u8,
        _ => {}
    }
    let total: u64 = hist.iter().sum();
    let sum_all: u64 = hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();

    // Score of a split is (s0*N - S*n0)^2 / (n0*n1), proportional to the
    // between-class variance; compared exactly as cross products.
    let mut best: Option<(u8, u128, u128, f64)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &count) in hist.iter().enumerate().take(255) {
        n0 += count;
        s0 += t as u64 * count;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (s0 as i128 * total as i128 - sum_all as i128 * n0 as i128).unsigned_abs();
        let num = diff.checked_mul(diff);
        let den = n0 as u128 * n1 as u128;
        let approx = (diff as f64).powi(2) / den as f64;
        let better = match (&best, num) {
            (None, _) => true,
            (Some((_, bnum, bden, bapprox)), Some(num)) => {
                match (num.checked_mul(*bden), bnum.checked_mul(den)) {
                    (Some(lhs), Some(rhs)) => lhs > rhs,
                    _ => approx > *bapprox,
                }
            }
            (Some((_, _, _, bapprox)), None) => approx > *bapprox,
        };
        if better {
            best = Some((t as u8, num.unwrap_or(u128::MAX), den, approx));
        }
    }
    best.map_or(0, |b| b.0)
}

/// Foreground where the rounded intensity exceeds `level`.
pub fn binarize_above(img: &GrayImage, level: u8) -> BinaryImage {
    img.map(|&v| quantize(v) > level)
}

/// Foreground on the dark side of the Otsu level (`bin <= level`). An image
/// with a single intensity has no dark side and yields an empty mask.
pub fn binarize_dark(img: &GrayImage) -> BinaryImage {
    let hist = histogram(img);
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return img.map(|_| false);
    }
    let level = otsu_from_histogram(&hist);
    img.map(|&v| quantize(v) <= level)
}

pub fn complement(img: &BinaryImage) -> BinaryImage {
    img.map(|&b| !b)
}

/// Canny edge detector settings. Thresholds are fractions of the largest
/// gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.0,
            lo: 0.1,
            hi: 0.3,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "canny sigma must be >= 0.5, got {}",
                self.sigma
            )));
        }
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds need 0 < lo < hi <= 1, got lo = {}, hi = {}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Separable convolution with replicated borders.
fn smooth(plane: &GrayImage, taps: &[f64]) -> GrayImage {
    let (w, h) = plane.dims();
    let r = (taps.len() / 2) as isize;
    let src = plane.as_slice();
    let mut tmp = vec![0.0; w * h];
    par::for_each_chunk_mut(&mut tmp, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                acc += t * src[y * w + sx];
            }
            *out = acc;
        }
    });
    let mut out = vec![0.0; w * h];
    par::for_each_chunk_mut(&mut out, w, |y, row| {
        for (x, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                acc += t * tmp[sy * w + x];
            }
            *o = acc;
        }
    });
    Plane::from_vec(w, h, out).expect("same dims")
}

/// Canny edge map: Gaussian smoothing, central-difference gradients,
/// four-direction non-maximum suppression and 8-connected hysteresis.
///
/// The gradient is taken before smoothing (the two linear steps commute away
/// from the border); this makes the map exactly invariant under `255 - I`.
pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<BinaryImage> {
    params.validate()?;
    let (w, h) = img.dims();
    let px = |x: isize, y: isize| -> f64 {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        *img.get(x, y)
    };
    let gx = Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (px(x + 1, y) - px(x - 1, y)) / 2.0
    });
    let gy = Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (px(x, y + 1) - px(x, y - 1)) / 2.0
    });
    let taps = gaussian_taps(params.sigma);
    let gx = smooth(&gx, &taps);
    let gy = smooth(&gy, &taps);
    let mag: Vec<f64> = gx
        .as_slice()
        .iter()
        .zip(gy.as_slice())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    let gmax = mag.iter().cloned().fold(0.0, f64::max);
    if gmax <= 0.0 {
        return Ok(Plane::filled(w, h, false));
    }
    let m = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let tan22 = (std::f64::consts::PI / 8.0).tan();
    let tan67 = (3.0 * std::f64::consts::PI / 8.0).tan();
    let (lo_t, hi_t) = (params.lo * gmax, params.hi * gmax);
    // 0 = suppressed, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let g = mag[i];
            if g < lo_t || g == 0.0 {
                continue;
            }
            let (ax, ay) = (gx.as_slice()[i].abs(), gy.as_slice()[i].abs());
            let (dx, dy) = if ay <= ax * tan22 {
                (1, 0)
            } else if ay >= ax * tan67 {
                (0, 1)
            } else if (gx.as_slice()[i] > 0.0) == (gy.as_slice()[i] > 0.0) {
                (1, 1)
            } else {
                (1, -1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let ahead = m(xi + dx, yi + dy);
            let behind = m(xi - dx, yi - dy);
            if g >= ahead && g > behind {
                class[i] = if g >= hi_t { 2 } else { 1 };
            }
        }
    }
    let mut edges = vec![false; w * h];
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    for &i in &queue {
        edges[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (nx, ny) in neighbors(x, y, Connectivity::Eight) {
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if class[j] > 0 && !edges[j] {
                edges[j] = true;
                queue.push_back(j);
            }
        }
    }
    Plane::from_vec(w, h, edges)
}

/// Pixel adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

fn neighbors(x: isize, y: isize, conn: Connectivity) -> impl Iterator<Item = (isize, isize)> {
    const FOUR: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const EIGHT: [(isize, isize); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    let offs: &'static [(isize, isize)] = match conn {
        Connectivity::Four => &FOUR,
        Connectivity::Eight => &EIGHT,
    };
    offs.iter().map(move |(dx, dy)| (x + dx, y + dy))
}

/// Sets every background pixel that is not 4-connected to the border.
pub fn fill_holes(img: &BinaryImage) -> BinaryImage {
    let (w, h) = img.dims();
    let src = img.as_slice();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let on_border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            let i = y * w + x;
            if on_border && !src[i] {
                outside[i] = true;
                queue.push_back(i);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (nx, ny) in neighbors(x, y, Connectivity::Four) {
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !src[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        }
    }
    Plane::from_vec(w, h, outside.into_iter().map(|o| !o).collect()).expect("same dims")
}

/// Component labels; 0 is background, components are `1..=count` in
/// raster-scan discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    pub labels: Plane<u32>,
    pub count: usize,
}

impl LabelImage {
    /// Pixel count of each label, index 0 unused.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count + 1];
        for &l in self.labels.as_slice() {
            areas[l as usize] += 1;
        }
        areas
    }

    pub fn mask(&self, label: u32) -> BinaryImage {
        self.labels.map(|&l| l == label)
    }
}

pub fn connected_components(img: &BinaryImage, conn: Connectivity) -> LabelImage {
    let (w, h) = img.dims();
    let src = img.as_slice();
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !src[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for (nx, ny) in neighbors(x, y, conn) {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if src[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    LabelImage {
        labels: Plane::from_vec(w, h, labels).expect("same dims"),
        count: next as usize,
    }
}

/// Mask of the label with the most pixels; ties go to the smallest label.
pub fn largest_component(labels: &LabelImage) -> Result<BinaryImage> {
    let areas = labels.areas();
    let best = (1..=labels.count)
        .fold(None::<(usize, usize)>, |best, l| match best {
            Some((_, a)) if a >= areas[l] => best,
            _ => Some((l, areas[l])),
        })
        .ok_or(Error::Empty("no foreground component"))?;
    Ok(labels.mask(best.0 as u32))
}

/// Tight inclusive box of every label, ordered by label.
pub fn bounding_boxes(labels: &LabelImage) -> Vec<BBox> {
    let mut boxes: Vec<Option<BBox>> = vec![None; labels.count];
    let w = labels.labels.width();
    for (i, &l) in labels.labels.as_slice().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let slot = &mut boxes[l as usize - 1];
        *slot = Some(match *slot {
            None => BBox::new(x, y, x, y),
            Some(b) => b.union(&BBox::new(x, y, x, y)),
        });
    }
    boxes.into_iter().map(|b| b.expect("labels are dense")).collect()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull vertices of a point set (monotone chain), counter-clockwise in
/// `(x, y)` coordinates, without collinear vertices.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Rasterized convex hull of the foreground pixel centers (boundary
/// inclusive) and the centroid `(x, y)` of the hull mask.
pub fn convex_hull_mask(img: &BinaryImage) -> Result<(BinaryImage, (f64, f64))> {
    let points: Vec<(i64, i64)> = img.foreground().map(|(x, y)| (x as i64, y as i64)).collect();
    if points.is_empty() {
        return Err(Error::Empty("convex hull of an empty mask"));
    }
    let hull = convex_hull(&points);
    let (w, h) = img.dims();
    let x0 = hull.iter().map(|p| p.0).min().unwrap();
    let x1 = hull.iter().map(|p| p.0).max().unwrap();
    let y0 = hull.iter().map(|p| p.1).min().unwrap();
    let y1 = hull.iter().map(|p| p.1).max().unwrap();
    let mut mask = Plane::filled(w, h, false);
    let (mut sx, mut sy, mut n) = (0f64, 0f64, 0usize);
    for y in y0..=y1 {
        for x in x0..=x1 {
            // the loop bounds already clip one- and two-point hulls
            let inside = match hull.len() {
                1 => true,
                2 => cross(hull[0], hull[1], (x, y)) == 0,
                k => (0..k).all(|i| cross(hull[i], hull[(i + 1) % k], (x, y)) >= 0),
            };
            if inside {
                *mask.get_mut(x as usize, y as usize) = true;
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
    }
    Ok((mask, (sx / n as f64, sy / n as f64)))
}
