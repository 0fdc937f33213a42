//! Renders a procedural street scene into a depth cube map and queries one
//! sensor against it.
//!
//! The scene is a disc of ground plane (with per-point normals, so grazing
//! rays stay accurate) plus three boxy objects. The queried cloud is written
//! as a binary point cloud next to a ground-truth annotation file.
//!
//! Usage: cargo run --release --example render_scene [OUT_DIR]

use std::collections::BTreeMap;
use std::path::PathBuf;

use lidarcs::geom::Category;
use lidarcs::io;
use lidarcs::pattern::{synthesize_pattern, SensorSpec};
use lidarcs::scene::{annotate, build_cube_map, query_pattern, shapes, PlacedObject, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lidarcs-render"));
    std::fs::create_dir_all(&out_dir)?;

    // Sensor mounted 2 m up: the ground plane sits 2 m below the origin.
    let (ground, normals) = shapes::ground_plane_grid(2.0, 0.15, 60.0, "000000");
    println!("background: {} ground points", ground.len());

    let placements = [
        (Category::Car, [12.0, 3.0, -2.0], 0.4, [1.9, 4.4, 1.5]),
        (Category::Truck, [25.0, -6.0, -2.0], -1.2, [2.6, 8.0, 3.2]),
        (Category::Pedestrian, [8.0, -2.0, -2.0], 0.0, [0.6, 0.6, 1.8]),
    ];
    let objects = placements
        .into_iter()
        .map(|(category, position, yaw, dims)| {
            let [w, l, h] = dims;
            PlacedObject::new(shapes::box_mesh(w, l, h), position, yaw, category, dims)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let scene = Scene::new(ground).with_normals(normals).with_objects(objects);
    let cube = build_cube_map(&scene, 1024, 0.12)?;
    println!("cube map: 6 x 1024 x 1024 faces, {} degenerate points", cube.degenerate_points());

    let spec = SensorSpec::vld_64();
    let pattern = synthesize_pattern(&spec)?;
    let cloud = query_pattern(&cube, &pattern, spec.max_range);
    println!(
        "{}: {} returns / {} rays ({:.1}%)",
        spec.name,
        cloud.len(),
        pattern.len(),
        100.0 * cloud.len() as f64 / pattern.len() as f64
    );

    let cloud_path = out_dir.join("000000.bin");
    io::write_cloud(&cloud_path, &cloud)?;
    let gt: BTreeMap<String, Vec<_>> = [("000000".to_string(), annotate(&scene))].into();
    let gt_path = out_dir.join("annotations.txt");
    io::write_ground_truth(&gt_path, &gt)?;
    println!("wrote {} and {}", cloud_path.display(), gt_path.display());
    Ok(())
}
