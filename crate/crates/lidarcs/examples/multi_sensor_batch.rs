//! Simulates one scene for the whole sensor suite in a single batch.
//!
//! The expensive part of simulation is rendering the scene into the depth
//! cube map; querying a sensor pattern against the finished map is cheap.
//! This example times individual queries against the batched path to show
//! that adding sensors costs far less than re-rendering.
//!
//! Usage: cargo run --release --example multi_sensor_batch

use std::time::Instant;

use lidarcs::pattern::{synthesize_pattern, RayPattern, SensorSpec};
use lidarcs::scene::{build_cube_map, query_pattern, query_patterns, shapes, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (ground, normals) = shapes::ground_plane_grid(2.0, 0.15, 60.0, "000000");
    let scene = Scene::new(ground).with_normals(normals);

    let specs = [
        SensorSpec::vld_16(),
        SensorSpec::vld_32(),
        SensorSpec::vld_64(),
        SensorSpec::vld_128(),
        SensorSpec::once_40(),
    ];
    let patterns: Vec<RayPattern> =
        specs.iter().map(synthesize_pattern).collect::<Result<_, _>>()?;
    let ranges: Vec<f64> = specs.iter().map(|s| s.max_range).collect();

    let start = Instant::now();
    let cube = build_cube_map(&scene, 1024, 0.12)?;
    let render_ms = start.elapsed().as_secs_f64() * 1e3;
    println!("render: {render_ms:.0} ms (paid once)");

    let mut slowest_ms: f64 = 0.0;
    for (pattern, &range) in patterns.iter().zip(&ranges) {
        let start = Instant::now();
        let cloud = query_pattern(&cube, pattern, range);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        slowest_ms = slowest_ms.max(ms);
        println!(
            "  {:8} {:7} returns / {:7} rays  {:6.1} ms",
            pattern.sensor_name,
            cloud.len(),
            pattern.len(),
            ms
        );
    }

    let start = Instant::now();
    let batched = query_patterns(&cube, &patterns, &ranges)?;
    let batch_ms = start.elapsed().as_secs_f64() * 1e3;
    println!(
        "batched: all {} sensors in {:.1} ms ({:.2}x the slowest single query)",
        batched.len(),
        batch_ms,
        batch_ms / slowest_ms
    );
    Ok(())
}
