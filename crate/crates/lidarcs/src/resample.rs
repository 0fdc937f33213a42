//! Retargeting recorded point clouds to other sensors by scan-line
//! selection.
//!
//! A recorded cloud is first split into scan lines ([`beam_decompose_cloud`]).
//! To mimic a coarser sensor, [`nnds`] keeps exactly the scan lines whose
//! elevations are nearest to one of the target pattern's beams — points are
//! copied, never interpolated, so every output point is a real measurement.
//! [`uniform_downsample`] is the naive baseline that keeps every k-th scan
//! line regardless of where the target sensor actually looks.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geom::PointCloud;
use crate::pattern::{
    beam_decompose_cloud, beam_decompose_pattern, BeamGroup, PatternError, RayPattern,
};

#[derive(Debug, Error, PartialEq)]
pub enum ResampleError {
    #[error("no usable points to resample")]
    EmptyInput,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<PatternError> for ResampleError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::EmptyInput => ResampleError::EmptyInput,
            PatternError::InvalidSpec(msg) => ResampleError::InvalidInput(msg),
        }
    }
}

/// For each target elevation, the index of the nearest source elevation;
/// exact ties pick the lower-elevation source beam. Inputs are beam
/// elevations in radians, sources in ascending order.
fn select_source_beams(source_elevations: &[f64], target_elevations: &[f64]) -> BTreeSet<usize> {
    let mut selected = BTreeSet::new();
    for &target in target_elevations {
        let mut best = 0;
        for (i, &source) in source_elevations.iter().enumerate() {
            // Strictly-better keeps the earliest (lowest) beam on ties.
            if (source - target).abs() < (source_elevations[best] - target).abs() {
                best = i;
            }
        }
        selected.insert(best);
    }
    selected
}

/// Source points from the selected scan lines, in their original order.
fn collect_selected(
    source: &PointCloud,
    beams: &[BeamGroup],
    selected: &BTreeSet<usize>,
) -> PointCloud {
    let mut keep: Vec<usize> = selected
        .iter()
        .flat_map(|&b| beams[b].members.iter().copied())
        .collect();
    keep.sort_unstable();
    let points = keep.into_iter().map(|i| source.points[i]).collect();
    PointCloud::from_points(source.frame_id.clone(), points)
}

/// Nearest-neighbor downsampling: keeps the scan lines of `source` whose
/// elevations best match the target pattern's beams, dropping the rest.
///
/// Points pass through untouched and keep their original order. Points at
/// the origin belong to no scan line and are dropped. The output carries
/// the source frame id and the target pattern's sensor name.
pub fn nnds(
    source: &PointCloud,
    target: &RayPattern,
    gap_threshold_deg: f64,
) -> Result<PointCloud, ResampleError> {
    let source_beams = beam_decompose_cloud(source, gap_threshold_deg)?;
    let target_beams = beam_decompose_pattern(target, gap_threshold_deg)?;
    let source_elevations: Vec<f64> = source_beams.iter().map(|b| b.elevation).collect();
    let target_elevations: Vec<f64> = target_beams.iter().map(|b| b.elevation).collect();
    let selected = select_source_beams(&source_elevations, &target_elevations);
    let mut cloud = collect_selected(source, &source_beams, &selected);
    cloud.sensor_id = Some(target.sensor_name.clone());
    Ok(cloud)
}

/// Keeps every `keep_every`-th scan line counting from the bottom
/// (`keep_every = 1` keeps them all). The sensor-blind baseline against
/// [`nnds`].
pub fn uniform_downsample(
    source: &PointCloud,
    keep_every: usize,
    gap_threshold_deg: f64,
) -> Result<PointCloud, ResampleError> {
    if keep_every == 0 {
        return Err(ResampleError::InvalidInput(
            "keep_every must be at least 1".into(),
        ));
    }
    let beams = beam_decompose_cloud(source, gap_threshold_deg)?;
    let selected: BTreeSet<usize> = (0..beams.len()).step_by(keep_every).collect();
    let mut cloud = collect_selected(source, &beams, &selected);
    cloud.sensor_id = source.sensor_id.clone();
    Ok(cloud)
}
