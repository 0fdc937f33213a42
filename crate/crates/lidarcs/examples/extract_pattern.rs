//! Recovers a sensor's scan pattern from raw captures.
//!
//! Simulates five noisy captures of a 32-beam sensor in which every frame
//! drops a random third of its returns, then merges the frames back into a
//! single deduplicated pattern and compares it with the original.
//!
//! Usage: cargo run --example extract_pattern

use lidarcs::geom::{ray_of, Point3, PointCloud};
use lidarcs::pattern::{
    extract_pattern, pattern_distance, synthesize_pattern, SensorSpec,
    DEFAULT_DEDUP_TOLERANCE_DEG,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = synthesize_pattern(&SensorSpec::vld_32())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Each capture sees the pattern at a random range per ray and loses a
    // third of the returns, so no single frame contains the full pattern.
    let frames: Vec<PointCloud> = (0..5)
        .map(|f| {
            let points: Vec<Point3> = truth
                .rays()
                .iter()
                .filter_map(|s| {
                    if !rng.gen_bool(2.0 / 3.0) {
                        return None;
                    }
                    let d = ray_of(s);
                    let range = rng.gen_range(5.0..80.0);
                    Some(Point3::new(d.dx() * range, d.dy() * range, d.dz() * range))
                })
                .collect();
            println!("frame {f}: {} of {} returns survived", points.len(), truth.len());
            PointCloud::from_points(format!("{f:06}"), points)
        })
        .collect();

    let recovered = extract_pattern(&frames, DEFAULT_DEDUP_TOLERANCE_DEG)?;
    let distance = pattern_distance(&truth, &recovered)?;
    println!(
        "recovered {} of {} rays; scan-line elevation distance {:.6} deg",
        recovered.len(),
        truth.len(),
        distance
    );
    Ok(())
}
