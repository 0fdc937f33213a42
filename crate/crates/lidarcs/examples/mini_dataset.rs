//! Generates a small multi-sensor dataset end to end and sanity-checks it.
//!
//! Four procedural frames are rendered once each and captured by two
//! sensors. Clouds, ground-truth annotations, and a dataset manifest are
//! written in the on-disk formats, read back, and fed through the evaluator
//! with the ground truth replayed as a perfect detector (mean AP must be 1).
//!
//! Usage: cargo run --release --example mini_dataset [OUT_DIR]

use std::collections::BTreeMap;
use std::path::PathBuf;

use lidarcs::eval::{evaluate, EvalConfig};
use lidarcs::geom::{Category, Detection, ObjectAnnotation};
use lidarcs::io::{self, Manifest, ManifestGroup};
use lidarcs::pattern::{synthesize_pattern, RayPattern, SensorSpec};
use lidarcs::scene::{shapes, simulate_frame, PlacedObject, RenderConfig, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lidarcs-mini-dataset"));

    let specs = [SensorSpec::vld_16(), SensorSpec::vld_32()];
    let patterns: Vec<RayPattern> =
        specs.iter().map(synthesize_pattern).collect::<Result<_, _>>()?;
    let ranges: Vec<f64> = specs.iter().map(|s| s.max_range).collect();
    for spec in &specs {
        std::fs::create_dir_all(out_dir.join("clouds").join(spec.name.to_lowercase()))?;
    }

    let config = RenderConfig { face_resolution: 512, splat_radius: 0.3 };
    let mut ground_truth: BTreeMap<String, Vec<ObjectAnnotation>> = BTreeMap::new();
    let mut frame_ids = Vec::new();
    for f in 0..4 {
        let frame_id = format!("{f:06}");
        // A spherical room keeps every ray bounded; the car orbits the sensor.
        let room = shapes::fibonacci_sphere_cloud(40.0, 120_000, &frame_id);
        let normals = shapes::radial_normals(&room);
        let angle = f as f64;
        let car = PlacedObject::new(
            shapes::box_mesh(1.9, 4.5, 1.6),
            [15.0 * angle.cos(), 15.0 * angle.sin(), -1.0],
            angle,
            Category::Car,
            [1.9, 4.5, 1.6],
        )?;
        let walker = PlacedObject::new(
            shapes::box_mesh(0.6, 0.6, 1.8),
            [6.0, -2.0 + f as f64, -1.0],
            0.0,
            Category::Pedestrian,
            [0.6, 0.6, 1.8],
        )?;
        let scene = Scene::new(room).with_normals(normals).with_objects(vec![car, walker]);

        let simulated = simulate_frame(&scene, &patterns, &ranges, &config)?;
        for (spec, mut cloud) in specs.iter().zip(simulated.clouds) {
            cloud.frame_id = frame_id.clone();
            let dir = out_dir.join("clouds").join(spec.name.to_lowercase());
            io::write_cloud(&dir.join(format!("{frame_id}.bin")), &cloud)?;
        }
        println!("frame {frame_id}: {} annotated objects", simulated.annotations.len());
        ground_truth.insert(frame_id.clone(), simulated.annotations);
        frame_ids.push(frame_id);
    }

    io::write_ground_truth(&out_dir.join("annotations.txt"), &ground_truth)?;
    let mut manifest = Manifest::new("mini");
    manifest.annotations = Some("annotations.txt".into());
    manifest.train = frame_ids[..3].to_vec();
    manifest.test = frame_ids[3..].to_vec();
    manifest.groups = specs
        .iter()
        .map(|s| ManifestGroup {
            sensor: s.name.clone(),
            dir: PathBuf::from("clouds").join(s.name.to_lowercase()),
        })
        .collect();
    let manifest_path = out_dir.join("dataset.txt");
    io::write_manifest(&manifest_path, &manifest)?;

    let stats = io::dataset_stats(&io::read_manifest(&manifest_path)?)?;
    println!(
        "dataset {}: {} train + {} test frames, {} sensor groups, {} annotated frames",
        stats.dataset,
        stats.train_frames,
        stats.test_frames,
        stats.sensor_groups,
        stats.annotated_frames
    );

    // Replay the ground truth as a detector: the score must be perfect.
    let gts = io::read_ground_truth(&out_dir.join("annotations.txt"))?;
    let oracle: BTreeMap<String, Vec<Detection>> = gts
        .iter()
        .map(|(frame, boxes)| {
            let dets = boxes.iter().map(|&b| Detection::new(b, 1.0).unwrap()).collect();
            (frame.clone(), dets)
        })
        .collect();
    let report = evaluate(&gts, &oracle, &EvalConfig::default())?;
    println!("oracle detector: mAP-present {:.4}", report.map_present);
    println!("dataset written to {}", out_dir.display());
    Ok(())
}
