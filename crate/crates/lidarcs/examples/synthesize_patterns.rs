//! Synthesizes the built-in sensor suite and writes one pattern file per
//! sensor.
//!
//! Usage: cargo run --example synthesize_patterns [OUT_DIR]

use std::path::PathBuf;

use lidarcs::io;
use lidarcs::pattern::{
    beam_decompose_pattern, synthesize_pattern, SensorSpec, DEFAULT_GAP_THRESHOLD_DEG,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lidarcs-patterns"));
    std::fs::create_dir_all(&out_dir)?;

    let suite = [
        SensorSpec::vld_16(),
        SensorSpec::vld_32(),
        SensorSpec::vld_64(),
        SensorSpec::vld_128(),
        SensorSpec::once_40(),
    ];
    for spec in suite {
        let pattern = synthesize_pattern(&spec)?;
        let lines = beam_decompose_pattern(&pattern, DEFAULT_GAP_THRESHOLD_DEG)?;
        let path = out_dir.join(format!("{}.txt", spec.name.to_lowercase()));
        io::write_pattern(&path, &pattern)?;
        println!(
            "{:8} {:7} rays  {:3} scan lines  elevation {:6.1}..{:5.1} deg  -> {}",
            spec.name,
            pattern.len(),
            lines.len(),
            spec.elevation_min_deg,
            spec.elevation_max_deg,
            path.display()
        );
    }
    Ok(())
}
