//! Face detection from skin color and FM texture blocks, and back-of-head
//! detection from dark AM mass with vertical FM stripes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::image::{BBox, BinaryImage, GrayImage, Plane, RgbImage};
use crate::par;
use crate::segment::{
    binarize_dark, canny, complement, connected_components, fill_holes, largest_component, CannyParams,
    Connectivity,
};
use crate::skin::skin_mask;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_BLOCK_SIZE: usize = 60;
pub const DEFAULT_STRIDE: usize = 30;
pub const DEFAULT_SKIN_FRACTION: f64 = 0.25;
pub const DEFAULT_HEAD_WINDOW: usize = 200;
pub const DEFAULT_TOP_COLUMNS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Face,
    NonFace,
}

impl Label {
    fn as_str(self) -> &'static str {
        match self {
            Label::Face => "face",
            Label::NonFace => "nonface",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "face" => Some(Label::Face),
            "nonface" => Some(Label::NonFace),
            _ => None,
        }
    }
}

/// Result of one KNN query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vote {
    pub label: Label,
    /// Share of the `k` neighbours that carry `label`.
    pub fraction: f64,
}

/// A lazy nearest-neighbour classifier over flattened 8-bit blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    block_width: usize,
    block_height: usize,
    labels: Vec<Label>,
    /// Row-major sample vectors laid end to end.
    features: Vec<u8>,
}

impl KnnModel {
    pub fn new(
        k: usize,
        block_width: usize,
        block_height: usize,
        samples: Vec<(Label, Vec<u8>)>,
    ) -> Result<Self> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(Error::Model(format!("k must be odd, got {k}")));
        }
        if samples.len() < k {
            return Err(Error::Model(format!(
                "need at least k = {k} samples, got {}",
                samples.len()
            )));
        }
        let dim = block_width * block_height;
        if dim == 0 {
            return Err(Error::Model("block dimensions must be positive".into()));
        }
        let mut labels = Vec::with_capacity(samples.len());
        let mut features = Vec::with_capacity(samples.len() * dim);
        for (i, (label, v)) in samples.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Model(format!(
                    "sample {i} has {} values, expected {dim}",
                    v.len()
                )));
            }
            labels.push(label);
            features.extend_from_slice(&v);
        }
        if !labels.contains(&Label::Face) || !labels.contains(&Label::NonFace) {
            log::warn!("KNN model has samples of a single class only");
        }
        Ok(KnnModel {
            k,
            block_width,
            block_height,
            labels,
            features,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.block_width, self.block_height)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> (Label, &[u8]) {
        let dim = self.dim();
        (self.labels[i], &self.features[i * dim..(i + 1) * dim])
    }

    fn dim(&self) -> usize {
        self.block_width * self.block_height
    }

    /// Majority label among the `k` samples nearest to `query` in Euclidean
    /// distance; equal distances rank by sample order.
    pub fn classify(&self, query: &[u8]) -> Result<Vote> {
        let dim = self.dim();
        if query.len() != dim {
            return Err(Error::Model(format!(
                "query has {} values, model expects {dim}",
                query.len()
            )));
        }
        // (distance, index) of the current k best, kept sorted
        let mut best: Vec<(u64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, sample) in self.features.chunks_exact(dim).enumerate() {
            let d = squared_distance(sample, query);
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        let faces = best
            .iter()
            .filter(|&&(_, i)| self.labels[i] == Label::Face)
            .count();
        let (label, winners) = if 2 * faces > self.k {
            (Label::Face, faces)
        } else {
            (Label::NonFace, self.k - faces)
        };
        Ok(Vote {
            label,
            fraction: winners as f64 / self.k as f64,
        })
    }

    /// Classifies a gray block after rounding it to 8 bits.
    pub fn classify_block(&self, block: &GrayImage) -> Result<Vote> {
        if block.dims() != self.block_dims() {
            return Err(Error::DimensionMismatch {
                left: block.dims(),
                right: self.block_dims(),
            });
        }
        self.classify(&block.to_u8())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "KNN{} {} {} {}\n",
            self.k,
            self.block_width,
            self.block_height,
            self.len()
        );
        for i in 0..self.len() {
            let (label, v) = self.sample(i);
            out.push_str(label.as_str());
            for b in v {
                let _ = write!(out, " {b}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Model("empty model file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Model(format!("bad model header {header:?}")))
        };
        let (k, w, h, n) = match fields.as_slice() {
            [tag, w, h, n] if tag.starts_with("KNN") => (parse(&tag[3..])?, parse(w)?, parse(h)?, parse(n)?),
            _ => return Err(Error::Model(format!("bad model header {header:?}"))),
        };
        let mut samples = Vec::with_capacity(n);
        for (row, line) in lines.enumerate() {
            let mut it = line.split_whitespace();
            let label = it
                .next()
                .and_then(Label::parse)
                .ok_or_else(|| Error::Model(format!("sample {row}: missing or unknown label")))?;
            let v = it
                .map(|t| t.parse::<u8>())
                .collect::<std::result::Result<Vec<u8>, _>>()
                .map_err(|e| Error::Model(format!("sample {row}: {e}")))?;
            samples.push((label, v));
        }
        if samples.len() != n {
            return Err(Error::Model(format!(
                "header declares {n} samples, file has {}",
                samples.len()
            )));
        }
        KnnModel::new(k, w, h, samples)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KnnModel::from_text(&text)
    }
}

fn squared_distance(a: &[u8], b: &[u8]) -> u64 {
    // chunked so the inner sum stays in u32 and vectorizes
    a.chunks(4096)
        .zip(b.chunks(4096))
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = x.abs_diff(y) as u32;
                    d * d
                })
                .sum::<u32>() as u64
        })
        .sum()
}

/// Builds a model from a manifest of `path,label` lines. Relative paths are
/// resolved against the manifest's directory; blank lines and `#` comments
/// are skipped.
pub fn train_knn(manifest: impl AsRef<Path>, k: usize, block_size: usize) -> Result<KnnModel> {
    let manifest = manifest.as_ref();
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = i + 1;
        let (path, label) = line
            .rsplit_once(',')
            .ok_or_else(|| Error::Model(format!("manifest row {row}: expected path,label")))?;
        let label = Label::parse(label.trim())
            .ok_or_else(|| Error::Model(format!("manifest row {row}: unknown label {:?}", label.trim())))?;
        let path = base.join(path.trim());
        let img = crate::pnm::load_pnm(&path)
            .map_err(|e| Error::Model(format!("manifest row {row}: {e}")))?
            .into_gray();
        if img.dims() != (block_size, block_size) {
            return Err(Error::Model(format!(
                "manifest row {row}: {} is {}x{}, expected {block_size}x{block_size}",
                path.display(),
                img.width(),
                img.height()
            )));
        }
        samples.push((label, img.to_u8()));
    }
    KnnModel::new(k, block_size, block_size, samples)
}

fn block_origins(len: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=len - size).step_by(stride).collect();
    if *v.last().unwrap() != len - size {
        v.push(len - size);
    }
    v
}

/// Raster-ordered `size`x`size` tiles at the given stride; the last row and
/// column of tiles are snapped to the image edge.
pub fn block_grid(width: usize, height: usize, size: usize, stride: usize) -> Result<Vec<BBox>> {
    if size == 0 || stride == 0 {
        return Err(Error::InvalidParameter(
            "block size and stride must be positive".into(),
        ));
    }
    if width < size || height < size {
        return Err(Error::Dimensions(format!(
            "{width}x{height} image is smaller than one {size}x{size} block"
        )));
    }
    let xs = block_origins(width, size, stride);
    let ys = block_origins(height, size, stride);
    Ok(ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| BBox::from_origin(x, y, size, size)))
        .collect())
}

pub fn extract_blocks(fm: &GrayImage, size: usize, stride: usize) -> Result<Vec<(BBox, GrayImage)>> {
    block_grid(fm.width(), fm.height(), size, stride)?
        .into_iter()
        .map(|b| Ok((b, fm.crop(b)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionKind {
    Face,
    BackOfHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub kind: DetectionKind,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub centroid: (f64, f64),
    /// Mean KNN vote fraction for faces, window foreground rate for heads.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceParams {
    pub block_size: usize,
    pub stride: usize,
    pub skin_fraction: f64,
}

impl Default for FaceParams {
    fn default() -> Self {
        FaceParams {
            block_size: DEFAULT_BLOCK_SIZE,
            stride: DEFAULT_STRIDE,
            skin_fraction: DEFAULT_SKIN_FRACTION,
        }
    }
}

/// Summed-area table with a zero first row and column.
pub struct IntegralImage {
    width: usize,
    sums: Vec<u64>,
}

impl IntegralImage {
    pub fn new(img: &BinaryImage) -> Self {
        let (w, h) = img.dims();
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut run = 0u64;
            for (x, &p) in img.row(y).iter().enumerate() {
                run += p as u64;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + run;
            }
        }
        IntegralImage { width: w, sums }
    }

    /// Foreground count inside `b`.
    pub fn sum(&self, b: &BBox) -> u64 {
        let s = self.width + 1;
        let at = |x: usize, y: usize| self.sums[y * s + x];
        at(b.x1 + 1, b.y1 + 1) + at(b.x0, b.y0) - at(b.x0, b.y1 + 1) - at(b.x1 + 1, b.y0)
    }
}

/// Blocks that are both mostly skin and classified as face, merged into one
/// detection per group of touching blocks.
pub fn face_detect(
    rgb: &RgbImage,
    fm: &GrayImage,
    model: &KnnModel,
    params: &FaceParams,
) -> Result<Vec<Detection>> {
    rgb.same_dims(fm)?;
    let grid = block_grid(fm.width(), fm.height(), params.block_size, params.stride)?;
    let skin = IntegralImage::new(&skin_mask(rgb));
    let verdicts = par::map_indexed(grid.len(), |i| -> Result<Option<f64>> {
        let b = grid[i];
        let frac = skin.sum(&b) as f64 / b.area() as f64;
        if frac < params.skin_fraction {
            return Ok(None);
        }
        let vote = model.classify_block(&fm.crop(b)?)?;
        Ok((vote.label == Label::Face).then_some(vote.fraction))
    });
    let mut accepted = Vec::new();
    for (b, v) in grid.iter().zip(verdicts) {
        if let Some(f) = v? {
            accepted.push((*b, f));
        }
    }
    Ok(merge_touching(&accepted)
        .into_iter()
        .map(|(bbox, score)| Detection {
            kind: DetectionKind::Face,
            bbox,
            centroid: bbox.center(),
            score,
        })
        .collect())
}

/// Groups boxes by transitive touching; each group becomes its union box and
/// the mean of its scores, ordered by the group's first member.
fn merge_touching(boxes: &[(BBox, f64)]) -> Vec<(BBox, f64)> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if boxes[i].0.touches(&boxes[j].0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, BBox, f64, usize)> = Vec::new();
    for (i, &(bbox, score)) in boxes.iter().enumerate() {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 = g.1.union(&bbox);
                g.2 += score;
                g.3 += 1;
            }
            None => groups.push((r, bbox, score, 1)),
        }
    }
    groups.into_iter().map(|(_, b, s, c)| (b, s / c as f64)).collect()
}

/// Keeps the `m` columns with the most foreground pixels (ties to the left);
/// empty columns are never kept.
pub fn top_columns(img: &BinaryImage, m: usize) -> BinaryImage {
    let (w, h) = img.dims();
    let mut counts = vec![0usize; w];
    for y in 0..h {
        for (c, &p) in counts.iter_mut().zip(img.row(y)) {
            *c += p as usize;
        }
    }
    let mut order: Vec<usize> = (0..w).filter(|&x| counts[x] > 0).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut keep = vec![false; w];
    for &x in order.iter().take(m) {
        keep[x] = true;
    }
    Plane::from_fn(w, h, |x, y| keep[x] && *img.get(x, y))
}

/// The densest `s`x`s` window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityWindow {
    pub row: usize,
    pub col: usize,
    pub count: u64,
    pub rate: f64,
}

impl DensityWindow {
    pub fn bbox(&self, s: usize) -> BBox {
        BBox::from_origin(self.col, self.row, s, s)
    }
}

/// Top-left corner and foreground rate of the `s`x`s` window with the most
/// foreground pixels, scanning every position; the first maximum in raster
/// order wins.
pub fn highest_dot_density_area(img: &BinaryImage, s: usize) -> Result<DensityWindow> {
    let (w, h) = img.dims();
    if s == 0 || w < s || h < s {
        return Err(Error::Dimensions(format!(
            "{w}x{h} image is smaller than the {s}x{s} window"
        )));
    }
    let ii = IntegralImage::new(img);
    let rows = par::map_indexed(h - s + 1, |i| {
        let mut best = (0u64, 0usize);
        for j in 0..=w - s {
            let c = ii.sum(&BBox::from_origin(j, i, s, s));
            if c > best.0 || j == 0 {
                best = (c, j);
            }
        }
        best
    });
    let mut win = DensityWindow {
        row: 0,
        col: rows[0].1,
        count: rows[0].0,
        rate: 0.0,
    };
    for (i, &(c, j)) in rows.iter().enumerate().skip(1) {
        if c > win.count {
            win = DensityWindow {
                row: i,
                col: j,
                count: c,
                rate: 0.0,
            };
        }
    }
    win.rate = win.count as f64 / (s * s) as f64;
    Ok(win)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadParams {
    pub window: usize,
    pub top_columns: usize,
    pub canny: CannyParams,
}

impl Default for HeadParams {
    fn default() -> Self {
        HeadParams {
            window: DEFAULT_HEAD_WINDOW,
            top_columns: DEFAULT_TOP_COLUMNS,
            canny: CannyParams::default(),
        }
    }
}

/// Intermediate masks of [`back_of_head_detect`].
#[derive(Debug, Clone)]
pub struct HeadStages {
    pub fm_dark: BinaryImage,
    pub edges: BinaryImage,
    pub filled: BinaryImage,
    pub am_dark: BinaryImage,
    pub combined: BinaryImage,
    pub columns: BinaryImage,
    pub window: DensityWindow,
}

/// Locates the back of a head: dark AM mass that carries vertical FM
/// texture. The densest window of stripe pixels is intersected with the
/// largest dark AM region; the tight box of that intersection is the
/// detection, or the window itself when they do not meet.
pub fn back_of_head_detect(am: &GrayImage, fm: &GrayImage, params: &HeadParams) -> Result<Detection> {
    back_of_head_stages(am, fm, params).map(|(d, _)| d)
}

pub fn back_of_head_stages(
    am: &GrayImage,
    fm: &GrayImage,
    params: &HeadParams,
) -> Result<(Detection, HeadStages)> {
    am.same_dims(fm)?;
    let s = params.window;
    if am.width() < s || am.height() < s {
        return Err(Error::Dimensions(format!(
            "{}x{} image is smaller than the {s}x{s} head window",
            am.width(),
            am.height()
        )));
    }
    let fm_dark = binarize_dark(fm);
    let edges = canny(&fm_dark.to_gray(), &params.canny)?;
    let filled = fill_holes(&edges);
    let am_dark = binarize_dark(am);
    if am_dark.count() == 0 {
        return Err(Error::Abstain("no dark region in the AM image".into()));
    }
    let combined = complement(&filled).and(&am_dark)?;
    let columns = top_columns(&combined, params.top_columns);
    let window = highest_dot_density_area(&columns, s)?;

    let wbox = window.bbox(s);
    let region = largest_component(&connected_components(&am_dark, Connectivity::Eight))?;
    let (mut n, mut sx, mut sy) = (0usize, 0usize, 0usize);
    let mut tight: Option<BBox> = None;
    for y in wbox.y0..=wbox.y1 {
        for x in wbox.x0..=wbox.x1 {
            if *region.get(x, y) {
                n += 1;
                sx += x;
                sy += y;
                let p = BBox::new(x, y, x, y);
                tight = Some(tight.map_or(p, |t| t.union(&p)));
            }
        }
    }
    let (bbox, centroid) = match tight {
        Some(b) => (b, (sx as f64 / n as f64, sy as f64 / n as f64)),
        None => (wbox, wbox.center()),
    };
    let det = Detection {
        kind: DetectionKind::BackOfHead,
        bbox,
        centroid,
        score: window.rate,
    };
    let stages = HeadStages {
        fm_dark,
        edges,
        filled,
        am_dark,
        combined,
        columns,
        window,
    };
    Ok((det, stages))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(samples: Vec<(Label, Vec<u8>)>) -> KnnModel {
        KnnModel::new(3, samples[0].1.len(), 1, samples).unwrap()
    }

    #[test]
    fn block_layout() {
        let xs = |w| {
            block_grid(w, 60, 60, 30)
                .unwrap()
                .iter()
                .map(|b| b.x0)
                .collect::<Vec<_>>()
        };
        assert_eq!(xs(60), vec![0]);
        assert_eq!(xs(120), vec![0, 30, 60]);
        assert_eq!(xs(100), vec![0, 30, 40]);
        assert!(block_grid(59, 60, 60, 30).is_err());
        let g = block_grid(90, 90, 60, 30).unwrap();
        assert_eq!(g[1], BBox::from_origin(30, 0, 60, 60));
        assert_eq!(g[2], BBox::from_origin(0, 30, 60, 60));
    }

    #[test]
    fn knn_exact_match_and_majority() {
        let m = model(vec![
            (Label::Face, vec![10, 10]),
            (Label::Face, vec![10, 10]),
            (Label::Face, vec![10, 10]),
            (Label::NonFace, vec![200, 200]),
        ]);
        assert_eq!(
            m.classify(&[10, 10]).unwrap(),
            Vote {
                label: Label::Face,
                fraction: 1.0
            }
        );
        let m = model(vec![
            (Label::Face, vec![0]),
            (Label::Face, vec![2]),
            (Label::NonFace, vec![3]),
            (Label::NonFace, vec![100]),
        ]);
        let v = m.classify(&[1]).unwrap();
        assert_eq!(v.label, Label::Face);
        assert!((v.fraction - 2.0 / 3.0).abs() < 1e-15);
        assert!(m.classify(&[1, 2]).is_err());
    }

    #[test]
    fn knn_tie_order() {
        // three samples at distance 1; the first two in order are NonFace
        let m = model(vec![
            (Label::NonFace, vec![4]),
            (Label::NonFace, vec![6]),
            (Label::Face, vec![4]),
            (Label::Face, vec![6]),
        ]);
        assert_eq!(m.classify(&[5]).unwrap().label, Label::NonFace);
    }

    #[test]
    fn knn_validation() {
        assert!(KnnModel::new(2, 1, 1, vec![(Label::Face, vec![0]); 3]).is_err());
        assert!(KnnModel::new(3, 1, 1, vec![(Label::Face, vec![0]); 2]).is_err());
        assert!(KnnModel::new(
            3,
            1,
            1,
            vec![
                (Label::Face, vec![0]),
                (Label::Face, vec![0, 1]),
                (Label::Face, vec![0])
            ]
        )
        .is_err());
        assert!(KnnModel::new(3, 1, 1, vec![(Label::Face, vec![0]); 3]).is_ok());
    }

    #[test]
    fn model_text_round_trip() {
        let m = KnnModel::new(
            3,
            2,
            2,
            vec![
                (Label::Face, vec![1, 2, 3, 4]),
                (Label::NonFace, vec![255, 0, 7, 9]),
                (Label::Face, vec![0, 0, 0, 0]),
            ],
        )
        .unwrap();
        let text = m.to_text();
        assert!(text.starts_with("KNN3 2 2 3\nface 1 2 3 4\n"));
        assert_eq!(KnnModel::from_text(&text).unwrap(), m);
        assert!(KnnModel::from_text("KNN3 2 2 4\nface 1 2 3 4\n").is_err());
        assert!(KnnModel::from_text("hello").is_err());
    }

    #[test]
    fn columns() {
        // counts [5, 1, 3, 2]
        let img = Plane::from_fn(4, 5, |x, y| y < [5, 1, 3, 2][x]);
        let kept = top_columns(&img, 2);
        assert_eq!(kept.count(), 8);
        assert!(*kept.get(0, 4) && *kept.get(2, 2) && !*kept.get(1, 0) && !*kept.get(3, 0));
        let img = Plane::from_fn(3, 4, |x, y| y < [4, 4, 1][x]);
        let kept = top_columns(&img, 1);
        assert_eq!(kept.count(), 4);
        assert!(*kept.get(0, 0));
        assert_eq!(top_columns(&img, 5), img);
    }

    #[test]
    fn density_examples() {
        let ones = Plane::filled(10, 10, true);
        let w = highest_dot_density_area(&ones, 4).unwrap();
        assert_eq!((w.row, w.col, w.rate), (0, 0, 1.0));
        let mut one = Plane::filled(12, 12, false);
        *one.get_mut(7, 7) = true;
        let w = highest_dot_density_area(&one, 4).unwrap();
        assert_eq!((w.row, w.col, w.rate), (4, 4, 1.0 / 16.0));
        assert!(highest_dot_density_area(&one, 13).is_err());
    }

    #[test]
    fn merging() {
        let a = (BBox::from_origin(0, 0, 60, 60), 1.0);
        let b = (BBox::from_origin(30, 0, 60, 60), 2.0 / 3.0);
        let c = (BBox::from_origin(300, 300, 60, 60), 1.0);
        let m = merge_touching(&[a, c, b]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].0, BBox::new(0, 0, 89, 59));
        assert!((m[0].1 - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(m[1], c);
    }

    #[test]
    fn no_skin_no_faces() {
        let rgb = Plane::filled(120, 120, [90u8, 90, 90]);
        let fm = Plane::filled(120, 120, 0.0);
        let m = KnnModel::new(3, 60, 60, vec![(Label::Face, vec![0; 3600]); 3]).unwrap();
        assert!(face_detect(&rgb, &fm, &m, &FaceParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn uniform_image_has_no_head() {
        let img = Plane::filled(220, 220, 200.0);
        assert!(matches!(
            back_of_head_detect(&img, &img, &HeadParams::default()),
            Err(Error::Abstain(_))
        ));
    }
}
