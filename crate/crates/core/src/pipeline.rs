//! Per-frame orchestration: demodulate, detect faces and heads, classify
//! their directions and collect the result in a serializable report.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::amfm::{am_image, analytic_image, fm_image, Demodulator, Selection};
use crate::attention::{
    associate_face_to_head, away_direction, majority_direction, patch_counts, Classifier, Direction,
    PatchCounts, Votes, DEFAULT_TOP_ROWS,
};
use crate::color::to_gray;
use crate::detect::{
    back_of_head_detect, face_detect, Detection, DetectionKind, FaceParams, HeadParams, KnnModel,
    DEFAULT_BLOCK_SIZE, DEFAULT_HEAD_WINDOW, DEFAULT_K, DEFAULT_SKIN_FRACTION, DEFAULT_STRIDE,
    DEFAULT_TOP_COLUMNS,
};
use crate::gabor::Filterbank;
use crate::image::{BBox, GrayImage, RgbImage};
use crate::segment::CannyParams;
use crate::skin::{skin_boxes, skin_mask, DEFAULT_MIN_SKIN_AREA};
use crate::{Error, Result};

/// Every tunable of the frame pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub block_size: usize,
    pub stride: usize,
    pub head_window: usize,
    pub top_columns: usize,
    pub canny: CannyParams,
    pub skin_fraction: f64,
    pub min_skin_area: usize,
    pub classifier: Classifier,
    pub top_rows: usize,
    pub k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            block_size: DEFAULT_BLOCK_SIZE,
            stride: DEFAULT_STRIDE,
            head_window: DEFAULT_HEAD_WINDOW,
            top_columns: DEFAULT_TOP_COLUMNS,
            canny: CannyParams::default(),
            skin_fraction: DEFAULT_SKIN_FRACTION,
            min_skin_area: DEFAULT_MIN_SKIN_AREA,
            classifier: Classifier::Majority,
            top_rows: DEFAULT_TOP_ROWS,
            k: DEFAULT_K,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

impl PipelineConfig {
    /// Sets one option by name. Names use dashes; underscores are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "block-size" => self.block_size = parse_value(&key, value)?,
            "stride" => self.stride = parse_value(&key, value)?,
            "head-window" => self.head_window = parse_value(&key, value)?,
            "top-columns" => self.top_columns = parse_value(&key, value)?,
            "canny-sigma" => self.canny.sigma = parse_value(&key, value)?,
            "canny-lo" => self.canny.lo = parse_value(&key, value)?,
            "canny-hi" => self.canny.hi = parse_value(&key, value)?,
            "skin-frac" => self.skin_fraction = parse_value(&key, value)?,
            "min-skin-area" => self.min_skin_area = parse_value(&key, value)?,
            "classifier" => self.classifier = value.parse()?,
            "top-rows" => self.top_rows = parse_value(&key, value)?,
            "k" => self.k = parse_value(&key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key=value", i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::InvalidParameter(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.canny.validate()?;
        let positive = [
            ("block-size", self.block_size),
            ("stride", self.stride),
            ("head-window", self.head_window),
            ("top-columns", self.top_columns),
            ("top-rows", self.top_rows),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.skin_fraction) {
            return Err(Error::InvalidParameter(format!(
                "skin-frac must lie in [0, 1], got {}",
                self.skin_fraction
            )));
        }
        if self.k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("k must be odd, got {}", self.k)));
        }
        Ok(())
    }

    pub fn face_params(&self) -> FaceParams {
        FaceParams {
            block_size: self.block_size,
            stride: self.stride,
            skin_fraction: self.skin_fraction,
        }
    }

    pub fn head_params(&self) -> HeadParams {
        HeadParams {
            window: self.head_window,
            top_columns: self.top_columns,
            canny: self.canny,
        }
    }
}

/// One detection with its direction verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub kind: DetectionKind,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub centroid: (f64, f64),
    pub score: f64,
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub votes: Option<Votes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch_counts: Option<PatchCounts>,
    /// The skin box whose position decided a head's direction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skin_box: Option<BBox>,
    /// Why no direction could be given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstain: Option<String>,
}

impl DetectionReport {
    fn bare(d: &Detection) -> Self {
        DetectionReport {
            kind: d.kind,
            bbox: d.bbox,
            centroid: d.centroid,
            score: d.score,
            direction: None,
            votes: None,
            patch_counts: None,
            skin_box: None,
            abstain: None,
        }
    }
}

/// Wall-clock cost of the pipeline stages; not serialized, so reports stay
/// reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub demodulation: Duration,
    pub faces: Duration,
    pub heads: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame: String,
    pub detections: Vec<DetectionReport>,
    /// Stages that could not run on this frame.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    /// Set when nothing could be analyzed at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstain: Option<String>,
    #[serde(skip)]
    pub timings: Timings,
}

impl FrameReport {
    pub fn abstained(&self) -> bool {
        self.abstain.is_some()
    }
}

/// AM and FM display images of a frame over all channels of `bank`.
pub fn am_fm_images(gray: &GrayImage, bank: &Filterbank) -> Result<(GrayImage, GrayImage)> {
    let asig = analytic_image(gray)?;
    let field = Demodulator::new(&asig, bank)?.dominant(Selection::All)?;
    Ok((am_image(&field), fm_image(&field)))
}

/// Runs the whole pipeline on one color frame. Stage failures are recorded
/// in the report; only invalid configuration is an error.
pub fn analyze_frame(
    frame: &str,
    rgb: &RgbImage,
    model: &KnnModel,
    bank: &Filterbank,
    cfg: &PipelineConfig,
) -> Result<FrameReport> {
    cfg.validate()?;
    let mut report = FrameReport {
        frame: frame.to_string(),
        detections: Vec::new(),
        skipped: Vec::new(),
        abstain: None,
        timings: Timings::default(),
    };

    let t = Instant::now();
    let (am, fm) = match am_fm_images(&to_gray(rgb), bank) {
        Ok(v) => v,
        Err(e) => {
            report.abstain = Some(format!("demodulation: {e}"));
            return Ok(report);
        }
    };
    report.timings.demodulation = t.elapsed();

    let t = Instant::now();
    match face_detect(rgb, &fm, model, &cfg.face_params()) {
        Ok(faces) => {
            for f in &faces {
                report.detections.push(face_report(f, &fm, cfg));
            }
        }
        Err(e) => report.skipped.push(format!("faces: {e}")),
    }
    report.timings.faces = t.elapsed();

    let t = Instant::now();
    match back_of_head_detect(&am, &fm, &cfg.head_params()) {
        // a window without any stripe evidence is not a detection
        Ok(head) if head.score > 0.0 => {
            let mut r = DetectionReport::bare(&head);
            let skin = skin_boxes(&skin_mask(rgb), cfg.min_skin_area);
            match associate_face_to_head(&skin, &head.bbox) {
                Some(b) => {
                    r.direction = Some(away_direction(&b, &head.bbox));
                    r.skin_box = Some(b);
                }
                None => r.abstain = Some("no skin region overlaps the head".into()),
            }
            report.detections.push(r);
        }
        Ok(_) | Err(Error::Abstain(_)) => {}
        Err(e) => report.skipped.push(format!("heads: {e}")),
    }
    report.timings.heads = t.elapsed();

    if report.skipped.len() == 2 {
        report.abstain = Some("frame is smaller than every detector window".into());
    }
    Ok(report)
}

fn face_report(face: &Detection, fm: &GrayImage, cfg: &PipelineConfig) -> DetectionReport {
    let mut r = DetectionReport::bare(face);
    let counts = fm
        .crop(face.bbox)
        .and_then(|block| patch_counts(&block, cfg.top_rows));
    match counts {
        Ok((pc, _)) => {
            r.patch_counts = Some(pc);
            r.direction = Some(cfg.classifier.classify(&pc));
            if cfg.classifier == Classifier::Majority {
                r.votes = Some(majority_direction(&pc).1);
            }
        }
        Err(e) => r.abstain = Some(e.to_string()),
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let mut c = PipelineConfig::default();
        c.apply_text("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        c.apply_text("# comment\nblock-size = 40\nskin_frac=0.5\nclassifier=fig412\n")
            .unwrap();
        assert_eq!(c.block_size, 40);
        assert_eq!(c.skin_fraction, 0.5);
        assert_eq!(c.classifier, Classifier::Fig412);
        assert!(c.apply_text("nope=1").is_err());
        assert!(c.apply_text("stride").is_err());
        assert!(c.apply_text("stride=abc").is_err());
    }

    #[test]
    fn validation() {
        let mut c = PipelineConfig::default();
        assert!(c.validate().is_ok());
        c.k = 4;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.canny.lo = 0.5;
        assert!(c.validate().is_err());
    }
}
