//! Left/right direction classification.
//!
//! Faces turned towards the camera are split into four patches around the
//! centroid of their convex hull; the dark FM pixels in each patch vote.
//! Heads seen from behind are classified by where the associated skin region
//! sits relative to the head.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::image::{BBox, GrayImage};
use crate::segment::{
    binarize_dark, connected_components, convex_hull_mask, fill_holes, largest_component, Connectivity,
};
use crate::{Error, Result};

/// Number of densest rows kept before counting patch pixels.
pub const DEFAULT_TOP_ROWS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

/// Foreground counts in the upper-left, upper-right, lower-left and
/// lower-right patches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PatchCounts {
    pub ul: usize,
    pub ur: usize,
    pub ll: usize,
    pub lr: usize,
}

impl PatchCounts {
    pub fn total(&self) -> usize {
        self.ul + self.ur + self.ll + self.lr
    }

    /// Counts of the horizontally mirrored face.
    pub fn mirrored(&self) -> Self {
        PatchCounts {
            ul: self.ur,
            ur: self.ul,
            ll: self.lr,
            lr: self.ll,
        }
    }
}

/// Intermediate values of [`patch_counts`], kept for reports and debugging.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDiagnostics {
    pub otsu_level: u8,
    pub hull_box: BBox,
    pub centroid: (f64, f64),
    /// Rows that survived the densest-row filter, ascending.
    pub kept_rows: Vec<usize>,
}

/// Quadrant counts of the dark FM features of one face block.
///
/// The dark side of the Otsu split is the feature mask. Its largest
/// 8-connected component, hole-filled, gives the face hull and the split
/// point. Feature pixels inside the hull are filtered down to the `top_rows`
/// densest rows (ties to the topmost) and counted per quadrant; pixels on the
/// split lines count as left and upper.
pub fn patch_counts(fm_block: &GrayImage, top_rows: usize) -> Result<(PatchCounts, PatchDiagnostics)> {
    let features = binarize_dark(fm_block);
    if features.count() == 0 {
        return Err(Error::Abstain("face block has no dark features".into()));
    }
    let otsu_level = crate::segment::otsu_threshold(fm_block);
    let labels = connected_components(&features, Connectivity::Eight);
    let face = fill_holes(&largest_component(&labels)?);
    let (hull, (cx, cy)) = convex_hull_mask(&face)?;
    let hull_box = hull
        .foreground()
        .map(|(x, y)| BBox::new(x, y, x, y))
        .reduce(|a, b| a.union(&b))
        .ok_or_else(|| Error::Abstain("empty face hull".into()))?;

    let mut row_counts: Vec<(usize, usize)> = (hull_box.y0..=hull_box.y1)
        .map(|y| {
            let n = (hull_box.x0..=hull_box.x1)
                .filter(|&x| *features.get(x, y) && *hull.get(x, y))
                .count();
            (y, n)
        })
        .collect();
    row_counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept_rows: Vec<usize> = row_counts
        .iter()
        .take(top_rows)
        .filter(|(_, n)| *n > 0)
        .map(|(y, _)| *y)
        .collect();
    kept_rows.sort_unstable();
    if kept_rows.is_empty() {
        return Err(Error::Abstain("no feature pixels inside the face hull".into()));
    }

    let mut counts = PatchCounts::default();
    for &y in &kept_rows {
        let upper = y as f64 <= cy;
        for x in hull_box.x0..=hull_box.x1 {
            if !(*features.get(x, y) && *hull.get(x, y)) {
                continue;
            }
            let left = x as f64 <= cx;
            match (upper, left) {
                (true, true) => counts.ul += 1,
                (true, false) => counts.ur += 1,
                (false, true) => counts.ll += 1,
                (false, false) => counts.lr += 1,
            }
        }
    }
    Ok((
        counts,
        PatchDiagnostics {
            otsu_level,
            hull_box,
            centroid: (cx, cy),
            kept_rows,
        },
    ))
}

/// A point strictly above `y = x` in the (left, right) plane looks right.
pub fn classify_patch(left_count: usize, right_count: usize) -> Direction {
    if right_count > left_count {
        Direction::Right
    } else {
        Direction::Left
    }
}

/// Verdicts of the three patch classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Votes {
    pub upper: Direction,
    pub lower: Direction,
    pub whole: Direction,
}

/// Majority of the upper-face, lower-face and whole-face votes.
pub fn majority_direction(pc: &PatchCounts) -> (Direction, Votes) {
    let votes = Votes {
        upper: classify_patch(pc.ul, pc.ur),
        lower: classify_patch(pc.ll, pc.lr),
        whole: classify_patch(pc.ul + pc.ll, pc.ur + pc.lr),
    };
    let rights = [votes.upper, votes.lower, votes.whole]
        .iter()
        .filter(|&&d| d == Direction::Right)
        .count();
    let dir = if rights >= 2 {
        Direction::Right
    } else {
        Direction::Left
    };
    (dir, votes)
}

/// The nested-comparison face-direction rule, transcribed branch by branch.
/// The branch it leaves open (`ul < ur` and `ll < lr`) returns `Right`.
pub fn classify_face_direction_fig412(ul: usize, ll: usize, ur: usize, lr: usize) -> Direction {
    if ul >= ur {
        if ll >= lr {
            Direction::Left
        } else if ul + ll >= ur + lr {
            Direction::Right
        } else {
            Direction::Left
        }
    } else if ll >= lr {
        if ul + ll >= ur + lr {
            Direction::Left
        } else {
            Direction::Right
        }
    } else {
        Direction::Right
    }
}

/// Face seen to the right of the back of the head means looking right.
pub fn away_direction(face_box: &BBox, head_box: &BBox) -> Direction {
    if face_box.center().0 > head_box.center().0 {
        Direction::Right
    } else {
        Direction::Left
    }
}

/// The skin box with the largest positive overlap with `head_box`; ties go to
/// the earliest box.
pub fn associate_face_to_head(skin_boxes: &[BBox], head_box: &BBox) -> Option<BBox> {
    let mut best: Option<(BBox, usize)> = None;
    for b in skin_boxes {
        let a = b.intersection_area(head_box);
        if a > 0 && best.is_none_or(|(_, ba)| a > ba) {
            best = Some((*b, a));
        }
    }
    best.map(|(b, _)| b)
}

/// Which rule turns patch counts into a face direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Classifier {
    #[default]
    Majority,
    Fig412,
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(Classifier::Majority),
            "fig412" => Ok(Classifier::Fig412),
            _ => Err(Error::InvalidParameter(format!(
                "unknown classifier {s:?} (expected majority or fig412)"
            ))),
        }
    }
}

impl Classifier {
    pub fn classify(&self, pc: &PatchCounts) -> Direction {
        match self {
            Classifier::Majority => majority_direction(pc).0,
            Classifier::Fig412 => classify_face_direction_fig412(pc.ul, pc.ll, pc.ur, pc.lr),
        }
    }
}
