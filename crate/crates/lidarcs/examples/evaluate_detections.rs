//! Scores a synthetic detector against ground truth.
//!
//! Builds ten frames of ground-truth boxes, then derives detections that
//! degrade with distance: jittered poses, a few missed boxes, a few spurious
//! ones, and occasional flipped headings. Prints the per-category report.
//!
//! Usage: cargo run --example evaluate_detections

use std::collections::BTreeMap;

use lidarcs::eval::{evaluate, EvalConfig};
use lidarcs::geom::{Category, Detection, ObjectAnnotation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ground_truth: BTreeMap<String, Vec<ObjectAnnotation>> = BTreeMap::new();
    let mut detections: BTreeMap<String, Vec<Detection>> = BTreeMap::new();

    let dims_of = |category: Category| match category {
        Category::Car => [1.9, 4.5, 1.6],
        Category::Truck => [2.6, 8.5, 3.2],
        Category::Pedestrian => [0.6, 0.6, 1.8],
        Category::Bicyclist => [0.6, 1.8, 1.7],
        Category::Motorcyclist => [0.8, 2.2, 1.6],
    };

    for f in 0..10 {
        let frame = format!("{f:06}");
        let mut gts = Vec::new();
        let mut dets = Vec::new();
        for (i, &category) in Category::ALL.iter().enumerate() {
            let [w, l, h] = dims_of(category);
            let x = 8.0 + 6.0 * i as f64 + rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-10.0..10.0);
            let yaw = rng.gen_range(-3.0..3.0);
            let gt = ObjectAnnotation::new(category, x, y, -1.2, w, l, h, yaw)?;
            gts.push(gt);

            if rng.gen_bool(0.9) {
                // Jitter grows with range; heading flips 10% of the time.
                let sigma = 0.02 * gt.planar_range();
                let flip = if rng.gen_bool(0.1) { std::f64::consts::PI } else { 0.0 };
                let guess = ObjectAnnotation::new(
                    category,
                    x + rng.gen_range(-sigma..sigma),
                    y + rng.gen_range(-sigma..sigma),
                    -1.2,
                    w,
                    l,
                    h,
                    yaw + flip + rng.gen_range(-0.05..0.05),
                )?;
                dets.push(Detection::new(guess, rng.gen_range(0.5..1.0))?);
            }
            if rng.gen_bool(0.15) {
                // A spurious detection far from anything real.
                let ghost =
                    ObjectAnnotation::new(category, -30.0, y, -1.2, w, l, h, 0.0)?;
                dets.push(Detection::new(ghost, rng.gen_range(0.1..0.5))?);
            }
        }
        ground_truth.insert(frame.clone(), gts);
        detections.insert(frame, dets);
    }

    let report = evaluate(&ground_truth, &detections, &EvalConfig::default())?;
    for c in &report.categories {
        println!(
            "{:13} ap={:.4}  gt={:3} det={:3} tp={:3} fp={:3} fn={:3}",
            c.category.as_str(),
            c.ap,
            c.gt_count,
            c.det_count,
            c.true_positives,
            c.false_positives,
            c.false_negatives
        );
    }
    println!("mAP {:.4} (over categories with ground truth: {:.4})", report.map, report.map_present);
    Ok(())
}
