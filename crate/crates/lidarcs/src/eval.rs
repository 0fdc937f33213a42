//! Detection-quality scoring: oriented-box IoU, greedy matching, and
//! interpolated average precision per object category.
//!
//! Boxes live in the ground plane with a heading: volume overlap is the
//! product of the rotated bird's-eye-view rectangle intersection and the
//! vertical interval overlap. A detection counts as a true positive when it
//! overlaps an unmatched same-frame ground-truth box of its category at or
//! above that category's IoU threshold *and* points the right way
//! (heading within a quarter turn). Matching is greedy in descending score
//! order, so the precision-recall curve of any score cutoff is consistent
//! with the full ranking.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::geom::{wrap_angle, Category, Detection, ObjectAnnotation};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("detections reference frame {0:?} absent from the ground truth")]
    MismatchedFrames(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Scoring parameters. `iou_thresholds` follows [`Category::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub iou_thresholds: [f64; Category::COUNT],
    /// Boxes (ground truth and detections alike) whose centers are farther
    /// than this from the sensor in the ground plane are ignored.
    pub max_eval_range: f64,
    /// Number of equally spaced recall points (including 0 and 1) that the
    /// precision curve is averaged over.
    pub recall_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            // Car, Truck, Pedestrian, Bicyclist, Motorcyclist.
            iou_thresholds: [0.7, 0.7, 0.3, 0.5, 0.5],
            max_eval_range: 70.0,
            recall_points: 50,
        }
    }
}

impl EvalConfig {
    pub fn threshold_for(&self, category: Category) -> f64 {
        self.iou_thresholds[category.index()]
    }

    fn validate(&self) -> Result<(), EvalError> {
        for (&t, c) in self.iou_thresholds.iter().zip(Category::ALL) {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) || t == 0.0 {
                return Err(EvalError::InvalidConfig(format!(
                    "IoU threshold for {c} must lie in (0, 1], got {t}"
                )));
            }
        }
        if !self.max_eval_range.is_finite() || self.max_eval_range <= 0.0 {
            return Err(EvalError::InvalidConfig(format!(
                "max_eval_range must be positive, got {}",
                self.max_eval_range
            )));
        }
        if self.recall_points < 2 {
            return Err(EvalError::InvalidConfig(format!(
                "recall_points must be at least 2, got {}",
                self.recall_points
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Oriented-box IoU.

/// Ground-plane corners in counter-clockwise order.
fn bev_corners(b: &ObjectAnnotation) -> [[f64; 2]; 4] {
    let (sin, cos) = b.yaw.sin_cos();
    let hl = b.length / 2.0;
    let hw = b.width / 2.0;
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .map(|(dx, dy)| [b.x + cos * dx - sin * dy, b.y + sin * dx + cos * dy])
}

/// Sutherland-Hodgman step: keeps the part of `poly` on or left of the
/// directed edge `a -> b`.
fn clip_left(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (dc, dp) = (side(cur), side(prev));
        if dp >= 0.0 {
            if dc >= 0.0 {
                out.push(cur);
            } else {
                let t = dp / (dp - dc);
                out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
        } else if dc >= 0.0 {
            let t = dp / (dp - dc);
            out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            out.push(cur);
        }
    }
    out
}

/// Shoelace area of a simple counter-clockwise polygon.
fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for (i, p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}

/// Volume intersection-over-union of two oriented boxes (categories are
/// ignored; this is pure geometry). Always in `[0, 1]`.
pub fn iou3d(a: &ObjectAnnotation, b: &ObjectAnnotation) -> f64 {
    let corners_b = bev_corners(b);
    let mut overlap: Vec<[f64; 2]> = bev_corners(a).to_vec();
    for i in 0..4 {
        overlap = clip_left(&overlap, corners_b[i], corners_b[(i + 1) % 4]);
        if overlap.len() < 3 {
            return 0.0;
        }
    }
    let bev_area = polygon_area(&overlap);
    let z_top = (a.z + a.height / 2.0).min(b.z + b.height / 2.0);
    let z_bottom = (a.z - a.height / 2.0).max(b.z - b.height / 2.0);
    let dz = (z_top - z_bottom).max(0.0);
    let intersection = bev_area * dz;
    let union = a.volume() + b.volume() - intersection;
    if union <= 0.0 {
        return 0.0;
    }
    (intersection / union).clamp(0.0, 1.0)
}

/// Whether a detected heading agrees with the ground truth: the wrapped
/// difference must be within a quarter turn, boundary included.
pub fn orientation_valid(det_yaw: f64, gt_yaw: f64) -> bool {
    wrap_angle(det_yaw - gt_yaw).abs() <= FRAC_PI_2
}

// ---------------------------------------------------------------------------
// Matching and average precision.

/// Scores for one category.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryReport {
    pub category: Category,
    pub gt_count: usize,
    pub det_count: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// False when the (range-gated) ground truth has no box of this
    /// category, in which case `ap` is reported as zero.
    pub has_gt: bool,
    pub ap: f64,
}

/// Scores across all categories.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// One entry per category, in [`Category::ALL`] order.
    pub categories: Vec<CategoryReport>,
    /// Mean AP over every category; categories without ground truth
    /// contribute zero.
    pub map: f64,
    /// Mean AP over only the categories that have ground truth (zero when
    /// none do). Equal to `map` on datasets where every category occurs.
    pub map_present: f64,
}

/// Mean over `recall_points` equally spaced recall values of the best
/// precision achieved at or beyond each recall; zero where the curve never
/// reaches the recall.
fn average_precision(outcomes: &[bool], gt_count: usize, recall_points: usize) -> f64 {
    if gt_count == 0 {
        return 0.0;
    }
    let mut curve = Vec::with_capacity(outcomes.len());
    let mut tp = 0usize;
    for (k, &hit) in outcomes.iter().enumerate() {
        if hit {
            tp += 1;
        }
        curve.push((tp as f64 / gt_count as f64, tp as f64 / (k + 1) as f64));
    }
    let spacing = (recall_points - 1) as f64;
    let mut total = 0.0;
    for j in 0..recall_points {
        let recall = j as f64 / spacing;
        total += curve
            .iter()
            .filter(|(r, _)| *r >= recall)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
    }
    total / recall_points as f64
}

/// Matches detections to ground truth and scores every category.
///
/// `ground_truth` maps frame ids to annotations; `detections` may cover any
/// subset of those frames but no others. Detections are processed in
/// descending score order (frame id, then within-frame position break
/// ties). Each detection matches the unmatched same-frame ground-truth box
/// of its category with the highest IoU at or above the category threshold;
/// a match with an invalid orientation counts as a false positive without
/// consuming the box.
pub fn evaluate(
    ground_truth: &BTreeMap<String, Vec<ObjectAnnotation>>,
    detections: &BTreeMap<String, Vec<Detection>>,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    config.validate()?;
    for frame in detections.keys() {
        if !ground_truth.contains_key(frame) {
            return Err(EvalError::MismatchedFrames(frame.clone()));
        }
    }

    let mut categories = Vec::with_capacity(Category::COUNT);
    for category in Category::ALL {
        let threshold = config.threshold_for(category);
        let gts: BTreeMap<&str, Vec<&ObjectAnnotation>> = ground_truth
            .iter()
            .map(|(frame, boxes)| {
                let kept = boxes
                    .iter()
                    .filter(|b| {
                        b.category == category && b.planar_range() <= config.max_eval_range
                    })
                    .collect();
                (frame.as_str(), kept)
            })
            .collect();
        let gt_count: usize = gts.values().map(Vec::len).sum();

        let mut dets: Vec<(&str, usize, &Detection)> = detections
            .iter()
            .flat_map(|(frame, ds)| {
                ds.iter().enumerate().filter_map(move |(i, d)| {
                    let keep = d.annotation.category == category
                        && d.annotation.planar_range() <= config.max_eval_range;
                    keep.then_some((frame.as_str(), i, d))
                })
            })
            .collect();
        dets.sort_by(|a, b| {
            b.2.score
                .total_cmp(&a.2.score)
                .then_with(|| a.0.cmp(b.0))
                .then_with(|| a.1.cmp(&b.1))
        });

        let mut consumed: BTreeMap<&str, Vec<bool>> = gts
            .iter()
            .map(|(frame, boxes)| (*frame, vec![false; boxes.len()]))
            .collect();
        let mut outcomes = Vec::with_capacity(dets.len());
        for (frame, _, det) in &dets {
            let frame_gts = &gts[frame];
            let flags = consumed.get_mut(frame).expect("frames validated above");
            let mut best: Option<(usize, f64)> = None;
            for (gi, gt) in frame_gts.iter().enumerate() {
                if flags[gi] {
                    continue;
                }
                let iou = iou3d(&det.annotation, gt);
                // Strict improvement keeps the earliest box on ties.
                if iou >= threshold && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((gi, iou));
                }
            }
            let hit = match best {
                Some((gi, _)) if orientation_valid(det.annotation.yaw, frame_gts[gi].yaw) => {
                    flags[gi] = true;
                    true
                }
                _ => false,
            };
            outcomes.push(hit);
        }

        let true_positives = outcomes.iter().filter(|&&h| h).count();
        categories.push(CategoryReport {
            category,
            gt_count,
            det_count: dets.len(),
            true_positives,
            false_positives: dets.len() - true_positives,
            false_negatives: gt_count - true_positives,
            has_gt: gt_count > 0,
            ap: average_precision(&outcomes, gt_count, config.recall_points),
        });
    }

    let map = categories.iter().map(|c| c.ap).sum::<f64>() / Category::COUNT as f64;
    let present = categories.iter().filter(|c| c.has_gt).count();
    let map_present = if present == 0 {
        0.0
    } else {
        categories
            .iter()
            .filter(|c| c.has_gt)
            .map(|c| c.ap)
            .sum::<f64>()
            / present as f64
    };
    Ok(EvalReport { categories, map, map_present })
}
