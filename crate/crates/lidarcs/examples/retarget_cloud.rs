//! Retargets a dense capture to a sparser sensor by scan-line selection.
//!
//! A 128-beam capture of a procedural scene is resampled to the 16-beam
//! target pattern two ways: nearest-scan-line selection (keeps the source
//! lines closest in elevation to the target's beams) and sensor-blind
//! uniform downsampling. Both are compared against a real 16-beam capture
//! of the same scene.
//!
//! Usage: cargo run --release --example retarget_cloud

use lidarcs::geom::PointCloud;
use lidarcs::pattern::{
    beam_decompose_cloud, synthesize_pattern, SensorSpec, DEFAULT_GAP_THRESHOLD_DEG,
};
use lidarcs::resample::{nnds, uniform_downsample};
use lidarcs::scene::{build_cube_map, query_pattern, shapes, Scene};

fn beam_elevations(cloud: &PointCloud) -> Vec<f64> {
    beam_decompose_cloud(cloud, DEFAULT_GAP_THRESHOLD_DEG)
        .map(|beams| beams.iter().map(|b| b.elevation.to_degrees()).collect())
        .unwrap_or_default()
}

/// Mean distance (degrees) from each reference elevation to its nearest
/// candidate elevation.
fn mean_elevation_gap(reference: &[f64], candidate: &[f64]) -> f64 {
    let total: f64 = reference
        .iter()
        .map(|r| {
            candidate
                .iter()
                .map(|c| (r - c).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / reference.len() as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (ground, normals) = shapes::ground_plane_grid(2.0, 0.15, 60.0, "000000");
    let scene = Scene::new(ground).with_normals(normals);
    let cube = build_cube_map(&scene, 1024, 0.12)?;

    let dense_spec = SensorSpec::vld_128();
    let target_spec = SensorSpec::vld_16();
    let dense = query_pattern(&cube, &synthesize_pattern(&dense_spec)?, dense_spec.max_range);
    let target_pattern = synthesize_pattern(&target_spec)?;
    let reference = query_pattern(&cube, &target_pattern, target_spec.max_range);
    println!(
        "dense {}: {} points; reference {}: {} points",
        dense_spec.name,
        dense.len(),
        target_spec.name,
        reference.len()
    );

    let retargeted = nnds(&dense, &target_pattern, DEFAULT_GAP_THRESHOLD_DEG)?;
    // 128 source lines / 16 target lines = keep every 8th for a fair baseline.
    let uniform = uniform_downsample(&dense, 8, DEFAULT_GAP_THRESHOLD_DEG)?;

    let reference_beams = beam_elevations(&reference);
    for (name, cloud) in [("nearest-line", &retargeted), ("uniform", &uniform)] {
        let beams = beam_elevations(cloud);
        println!(
            "{:13} {:6} points, {:2} scan lines, mean elevation gap to reference {:.4} deg",
            name,
            cloud.len(),
            beams.len(),
            mean_elevation_gap(&reference_beams, &beams)
        );
    }
    Ok(())
}
