//! Ray-pattern recovery and synthesis.
//!
//! A spinning LiDAR fires along a fixed set of directions; normalizing every
//! return of a sweep onto the unit sphere exposes that set. [`extract_pattern`]
//! merges the normalized directions of many sweeps and removes duplicates
//! within an angular tolerance, so dropouts in single frames fill in across a
//! recording. [`synthesize_pattern`] builds the ideal pattern of a uniform
//! multi-beam sensor directly from its spec, and [`beam_decompose`] splits
//! either kind of input back into horizontal scan lines by clustering
//! elevation angles.

use std::collections::HashMap;
use std::f64::consts::TAU;

use thiserror::Error;

use crate::geom::{
    normalize_to_sphere, spherical_of, PointCloud, SphericalDirection, UnitRay,
};

/// Default angular tolerance (degrees) below which two rays count as the
/// same physical beam direction.
pub const DEFAULT_DEDUP_TOLERANCE_DEG: f64 = 0.05;

/// Default elevation gap (degrees) that separates two scan lines.
pub const DEFAULT_GAP_THRESHOLD_DEG: f64 = 0.1;

/// Default horizontal angular step (degrees) of a synthesized spinning sensor.
pub const DEFAULT_AZIMUTH_RESOLUTION_DEG: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("no usable rays or points in the input")]
    EmptyInput,
    #[error("invalid sensor spec: {0}")]
    InvalidSpec(String),
}

/// The fixed set of firing directions of one sensor, sorted by
/// `(elevation, azimuth)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPattern {
    rays: Vec<SphericalDirection>,
    pub sensor_name: String,
    /// Number of scan lines, when known from synthesis.
    pub beam_count: Option<usize>,
    /// Horizontal angular step in degrees, when known from synthesis.
    pub azimuth_resolution_deg: Option<f64>,
}

impl RayPattern {
    /// Builds a pattern from arbitrary directions, sorting them into the
    /// canonical `(elevation, azimuth)` order.
    pub fn from_directions(sensor_name: impl Into<String>, mut rays: Vec<SphericalDirection>) -> Self {
        rays.sort_by(|a, b| {
            a.elevation
                .total_cmp(&b.elevation)
                .then(a.azimuth.total_cmp(&b.azimuth))
        });
        Self {
            rays,
            sensor_name: sensor_name.into(),
            beam_count: None,
            azimuth_resolution_deg: None,
        }
    }

    pub fn rays(&self) -> &[SphericalDirection] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Geometry of an idealized spinning multi-beam sensor: equally spaced
/// beams over a vertical field of view, stepped uniformly in azimuth.
/// Angles in degrees, distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub name: String,
    pub beam_count: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub azimuth_resolution_deg: f64,
    pub max_range: f64,
    /// Height of the sensor above the ground; scenes are expressed in the
    /// sensor frame, so a flat ground sits at `z = -mount_height`.
    pub mount_height: f64,
}

impl SensorSpec {
    pub fn new(
        name: impl Into<String>,
        beam_count: usize,
        elevation_min_deg: f64,
        elevation_max_deg: f64,
    ) -> Self {
        Self {
            name: name.into(),
            beam_count,
            elevation_min_deg,
            elevation_max_deg,
            azimuth_resolution_deg: DEFAULT_AZIMUTH_RESOLUTION_DEG,
            max_range: 100.0,
            mount_height: 2.0,
        }
    }

    pub fn with_azimuth_resolution(mut self, degrees: f64) -> Self {
        self.azimuth_resolution_deg = degrees;
        self
    }

    pub fn with_max_range(mut self, meters: f64) -> Self {
        self.max_range = meters;
        self
    }

    /// 16 beams over a symmetric 30° vertical field of view.
    pub fn vld_16() -> Self {
        Self::new("VLD-16", 16, -15.0, 15.0).with_max_range(100.0)
    }

    /// 32 beams from -30° up to +10°.
    pub fn vld_32() -> Self {
        Self::new("VLD-32", 32, -30.0, 10.0).with_max_range(100.0)
    }

    /// 64 beams over a 26.9° field of view biased downward.
    pub fn vld_64() -> Self {
        Self::new("VLD-64", 64, -24.9, 2.0).with_max_range(120.0)
    }

    /// 128 beams from -25° up to +15°, long range.
    pub fn vld_128() -> Self {
        Self::new("VLD-128", 128, -25.0, 15.0).with_max_range(245.0)
    }

    /// 40 beams from -25° up to +15°.
    pub fn once_40() -> Self {
        Self::new("ONCE-40", 40, -25.0, 15.0).with_max_range(200.0)
    }

    /// Number of azimuth steps in one revolution.
    pub fn azimuth_steps(&self) -> usize {
        (360.0 / self.azimuth_resolution_deg).round() as usize
    }

    pub fn validate(&self) -> Result<(), PatternError> {
        let err = |msg: String| Err(PatternError::InvalidSpec(msg));
        if self.beam_count == 0 {
            return err("beam_count must be at least 1".into());
        }
        for (label, v) in [
            ("elevation_min_deg", self.elevation_min_deg),
            ("elevation_max_deg", self.elevation_max_deg),
            ("azimuth_resolution_deg", self.azimuth_resolution_deg),
            ("max_range", self.max_range),
            ("mount_height", self.mount_height),
        ] {
            if !v.is_finite() {
                return err(format!("{label} must be finite"));
            }
        }
        if self.elevation_min_deg < -90.0 || self.elevation_max_deg > 90.0 {
            return err(format!(
                "elevation bounds [{}, {}] exceed [-90, 90]",
                self.elevation_min_deg, self.elevation_max_deg
            ));
        }
        // A single beam sits at the midpoint, so equal bounds are fine there;
        // spreading two or more beams needs a real interval.
        if self.beam_count == 1 {
            if self.elevation_min_deg > self.elevation_max_deg {
                return err("elevation_min_deg must not exceed elevation_max_deg".into());
            }
        } else if self.elevation_min_deg >= self.elevation_max_deg {
            return err("elevation_min_deg must be strictly below elevation_max_deg".into());
        }
        if self.azimuth_resolution_deg <= 0.0 {
            return err("azimuth_resolution_deg must be positive".into());
        }
        let steps = 360.0 / self.azimuth_resolution_deg;
        if steps.round() < 1.0 || (steps - steps.round()).abs() > 1e-9 {
            return err(format!(
                "azimuth_resolution_deg {} must divide 360 evenly",
                self.azimuth_resolution_deg
            ));
        }
        if self.max_range <= 0.0 {
            return err("max_range must be positive".into());
        }
        if self.mount_height < 0.0 {
            return err("mount_height must not be negative".into());
        }
        Ok(())
    }
}

/// Builds the ideal ray pattern of a spec: `beam_count` equally spaced
/// elevations from `elevation_min_deg` to `elevation_max_deg` inclusive
/// (a single beam sits at the midpoint), each swept through a full
/// revolution at `azimuth_resolution_deg`.
pub fn synthesize_pattern(spec: &SensorSpec) -> Result<RayPattern, PatternError> {
    spec.validate()?;
    let steps = spec.azimuth_steps();
    let mut rays = Vec::with_capacity(spec.beam_count * steps);
    for beam in 0..spec.beam_count {
        let elevation_deg = if spec.beam_count == 1 {
            0.5 * (spec.elevation_min_deg + spec.elevation_max_deg)
        } else {
            let span = spec.elevation_max_deg - spec.elevation_min_deg;
            spec.elevation_min_deg + span * beam as f64 / (spec.beam_count - 1) as f64
        };
        for step in 0..steps {
            let azimuth_deg = step as f64 * spec.azimuth_resolution_deg;
            rays.push(SphericalDirection::new(
                azimuth_deg.to_radians(),
                elevation_deg.to_radians(),
            ));
        }
    }
    let mut pattern = RayPattern::from_directions(spec.name.clone(), rays);
    pattern.beam_count = Some(spec.beam_count);
    pattern.azimuth_resolution_deg = Some(spec.azimuth_resolution_deg);
    Ok(pattern)
}

/// Spatial hash over `(elevation, azimuth)` cells of `tolerance` size used
/// to deduplicate rays without an all-pairs scan. Neighbor lookups span the
/// adjacent elevation rows and an azimuth window widened by `1/cos(elevation)`
/// so the great-circle tolerance is honored even where azimuth cells shrink.
struct DedupGrid {
    tol_rad: f64,
    cos_tol: f64,
    azimuth_cells: i64,
    cells: HashMap<(i64, i64), Vec<u32>>,
    kept: Vec<(UnitRay, SphericalDirection)>,
}

impl DedupGrid {
    fn new(tol_rad: f64) -> Self {
        Self {
            tol_rad,
            cos_tol: tol_rad.cos(),
            azimuth_cells: (TAU / tol_rad).ceil().max(1.0) as i64,
            cells: HashMap::new(),
            kept: Vec::new(),
        }
    }

    fn cell_of(&self, s: &SphericalDirection) -> (i64, i64) {
        let row = (s.elevation / self.tol_rad).floor() as i64;
        let col = ((s.azimuth / self.tol_rad).floor() as i64).rem_euclid(self.azimuth_cells);
        (row, col)
    }

    /// Azimuth half-width (in cells) that can still contain a ray within
    /// tolerance of a ray at elevation `e`: solves the spherical triangle
    /// bound `sin(delta/2) = sin(tol/2) / cos(e +- tol)`.
    fn azimuth_half_width(&self, elevation: f64) -> i64 {
        let band = elevation.abs() + self.tol_rad;
        let cos_band = band.cos();
        if cos_band <= (self.tol_rad / 2.0).sin() {
            return self.azimuth_cells / 2 + 1;
        }
        let half = ((self.tol_rad / 2.0).sin() / cos_band).min(1.0).asin();
        let delta = 2.0 * half;
        let cells = (delta / self.tol_rad).floor() as i64 + 1;
        cells.min(self.azimuth_cells / 2 + 1)
    }

    /// Keeps the ray unless an already kept ray lies within tolerance;
    /// returns whether it was kept.
    fn try_insert(&mut self, ray: UnitRay, sph: SphericalDirection) -> bool {
        let (row, col) = self.cell_of(&sph);
        let half_width = self.azimuth_half_width(sph.elevation);
        for dr in -1..=1 {
            for dc in -half_width..=half_width {
                let key = (row + dr, (col + dc).rem_euclid(self.azimuth_cells));
                let Some(bucket) = self.cells.get(&key) else { continue };
                for &idx in bucket {
                    if self.kept[idx as usize].0.dot(&ray) >= self.cos_tol {
                        return false;
                    }
                }
            }
        }
        let idx = self.kept.len() as u32;
        self.kept.push((ray, sph));
        self.cells.entry((row, col)).or_default().push(idx);
        true
    }

    fn into_directions(self) -> Vec<SphericalDirection> {
        self.kept.into_iter().map(|(_, s)| s).collect()
    }
}

/// Recovers a sensor's ray pattern from one or more recorded sweeps.
///
/// Every point is normalized onto the unit sphere; directions from all
/// frames are merged and deduplicated so that no two kept rays lie within
/// `tolerance_deg` of each other (great-circle distance). Points within
/// [`crate::geom::DEGENERATE_RANGE_EPSILON`] of the origin are skipped.
/// The pattern is named after the first frame that carries a `sensor_id`.
pub fn extract_pattern(frames: &[PointCloud], tolerance_deg: f64) -> Result<RayPattern, PatternError> {
    if !tolerance_deg.is_finite() || tolerance_deg <= 0.0 {
        return Err(PatternError::InvalidSpec(format!(
            "dedup tolerance must be positive, got {tolerance_deg}"
        )));
    }
    let mut grid = DedupGrid::new(tolerance_deg.to_radians());
    let mut usable = false;
    for frame in frames {
        for point in &frame.points {
            let Ok(ray) = normalize_to_sphere(point) else { continue };
            usable = true;
            grid.try_insert(ray, spherical_of(&ray));
        }
    }
    if !usable {
        return Err(PatternError::EmptyInput);
    }
    let name = frames
        .iter()
        .find_map(|f| f.sensor_id.clone())
        .unwrap_or_else(|| "extracted".to_string());
    Ok(RayPattern::from_directions(name, grid.into_directions()))
}

/// One horizontal scan line found by elevation clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGroup {
    /// Mean elevation of the members, radians.
    pub elevation: f64,
    /// Indices into the decomposed collection, ascending.
    pub members: Vec<usize>,
}

/// Sorts by elevation and splits wherever consecutive elevations are more
/// than `gap_rad` apart. Each input index lands in exactly one group;
/// groups come back bottom-to-top.
fn cluster_by_elevation(mut indexed: Vec<(usize, f64)>, gap_rad: f64) -> Vec<BeamGroup> {
    indexed.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut groups: Vec<BeamGroup> = Vec::new();
    let mut start = 0;
    for i in 1..=indexed.len() {
        let split = i == indexed.len() || indexed[i].1 - indexed[i - 1].1 > gap_rad;
        if !split {
            continue;
        }
        let slice = &indexed[start..i];
        let mut members: Vec<usize> = slice.iter().map(|(idx, _)| *idx).collect();
        members.sort_unstable();
        let elevation = slice.iter().map(|(_, e)| e).sum::<f64>() / slice.len() as f64;
        groups.push(BeamGroup { elevation, members });
        start = i;
    }
    groups
}

fn check_gap(gap_threshold_deg: f64) -> Result<f64, PatternError> {
    if !gap_threshold_deg.is_finite() || gap_threshold_deg <= 0.0 {
        return Err(PatternError::InvalidSpec(format!(
            "gap threshold must be positive, got {gap_threshold_deg}"
        )));
    }
    Ok(gap_threshold_deg.to_radians())
}

/// Splits a ray pattern into scan lines. Group members index into
/// `pattern.rays()`.
pub fn beam_decompose_pattern(
    pattern: &RayPattern,
    gap_threshold_deg: f64,
) -> Result<Vec<BeamGroup>, PatternError> {
    let gap = check_gap(gap_threshold_deg)?;
    if pattern.is_empty() {
        return Err(PatternError::EmptyInput);
    }
    let indexed = pattern
        .rays()
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.elevation))
        .collect();
    Ok(cluster_by_elevation(indexed, gap))
}

/// Splits a recorded cloud into scan lines by the elevation of each point's
/// direction. Degenerate points (at the origin) belong to no scan line and
/// are left out. Group members index into `cloud.points`.
pub fn beam_decompose_cloud(
    cloud: &PointCloud,
    gap_threshold_deg: f64,
) -> Result<Vec<BeamGroup>, PatternError> {
    let gap = check_gap(gap_threshold_deg)?;
    let indexed: Vec<(usize, f64)> = cloud
        .points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            normalize_to_sphere(p)
                .ok()
                .map(|ray| (i, spherical_of(&ray).elevation))
        })
        .collect();
    if indexed.is_empty() {
        return Err(PatternError::EmptyInput);
    }
    Ok(cluster_by_elevation(indexed, gap))
}

/// Symmetric mean nearest-neighbor distance between the beam elevation sets
/// of two patterns, in degrees. Decomposition uses
/// [`DEFAULT_GAP_THRESHOLD_DEG`].
pub fn pattern_distance(a: &RayPattern, b: &RayPattern) -> Result<f64, PatternError> {
    let beams_a = beam_decompose_pattern(a, DEFAULT_GAP_THRESHOLD_DEG)?;
    let beams_b = beam_decompose_pattern(b, DEFAULT_GAP_THRESHOLD_DEG)?;
    let elevs_a: Vec<f64> = beams_a.iter().map(|g| g.elevation).collect();
    let elevs_b: Vec<f64> = beams_b.iter().map(|g| g.elevation).collect();
    let mean_nn = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .map(|e| {
                to.iter()
                    .map(|o| (e - o).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / from.len() as f64
    };
    Ok((0.5 * (mean_nn(&elevs_a, &elevs_b) + mean_nn(&elevs_b, &elevs_a))).to_degrees())
}
