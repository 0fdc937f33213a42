//! Geometry primitives shared across the toolkit: points, unit rays,
//! spherical directions, and the oriented-box annotations consumed by the
//! evaluation module.
//!
//! Conventions: right-handed sensor frame, +z up, distances in meters,
//! angles in radians unless a name says otherwise. Azimuth is measured
//! counter-clockwise from +x in `[0, 2π)`; elevation from the x-y plane in
//! `[-π/2, π/2]`; at the poles azimuth is defined as 0.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

/// Points closer to the origin than this (meters) have no usable direction.
pub const DEGENERATE_RANGE_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("point lies within {DEGENERATE_RANGE_EPSILON} m of the origin and has no direction")]
    DegenerateRange,
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
}

/// A point in the sensor frame. `intensity` is carried through I/O
/// untouched; simulated points are emitted with intensity 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, intensity: 0.0 }
    }

    pub fn with_intensity(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self { x, y, z, intensity }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.intensity.is_finite()
    }
}

/// An unordered sweep of points tagged with the frame it came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub frame_id: String,
    pub sensor_id: Option<String>,
}

impl PointCloud {
    pub fn new(frame_id: impl Into<String>) -> Self {
        Self { points: Vec::new(), frame_id: frame_id.into(), sensor_id: None }
    }

    pub fn from_points(frame_id: impl Into<String>, points: Vec<Point3>) -> Self {
        Self { points, frame_id: frame_id.into(), sensor_id: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A unit-length direction. Constructors normalize, so the unit-norm
/// invariant holds to machine precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRay {
    pub(crate) dx: f64,
    pub(crate) dy: f64,
    pub(crate) dz: f64,
}

impl UnitRay {
    /// Normalizes an arbitrary direction vector. Errors when the vector is
    /// shorter than [`DEGENERATE_RANGE_EPSILON`].
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self, GeomError> {
        let n = (dx * dx + dy * dy + dz * dz).sqrt();
        if !n.is_finite() || n <= DEGENERATE_RANGE_EPSILON {
            return Err(GeomError::DegenerateRange);
        }
        Ok(Self { dx: dx / n, dy: dy / n, dz: dz / n })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn dot(&self, other: &UnitRay) -> f64 {
        self.dx * other.dx + self.dy * other.dy + self.dz * other.dz
    }
}

/// A direction in spherical coordinates, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    /// Counter-clockwise from +x, in `[0, 2π)`.
    pub azimuth: f64,
    /// Above the x-y plane, in `[-π/2, π/2]`.
    pub elevation: f64,
}

impl SphericalDirection {
    /// Builds a direction, wrapping azimuth into `[0, 2π)` and clamping
    /// elevation to `[-π/2, π/2]`.
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        let mut az = azimuth.rem_euclid(TAU);
        if az >= TAU {
            az = 0.0;
        }
        Self { azimuth: az, elevation: elevation.clamp(-PI / 2.0, PI / 2.0) }
    }
}

/// Euclidean distance of a point from the sensor origin.
pub fn range_of(p: &Point3) -> f64 {
    (p.x * p.x + p.y * p.y + p.z * p.z).sqrt()
}

/// Projects a point onto the unit sphere around the sensor by dividing each
/// coordinate by the point's range. Errors for points within
/// [`DEGENERATE_RANGE_EPSILON`] of the origin.
pub fn normalize_to_sphere(p: &Point3) -> Result<UnitRay, GeomError> {
    let r = range_of(p);
    if !r.is_finite() || r <= DEGENERATE_RANGE_EPSILON {
        return Err(GeomError::DegenerateRange);
    }
    Ok(UnitRay { dx: p.x / r, dy: p.y / r, dz: p.z / r })
}

/// Converts a unit ray to spherical coordinates. At the exact poles
/// (`dx == dy == 0`) azimuth is 0 by convention.
pub fn spherical_of(ray: &UnitRay) -> SphericalDirection {
    let elevation = ray.dz.clamp(-1.0, 1.0).asin();
    let azimuth = if ray.dx == 0.0 && ray.dy == 0.0 {
        0.0
    } else {
        let mut az = ray.dy.atan2(ray.dx);
        if az < 0.0 {
            az += TAU;
        }
        // Tiny negative angles can round up to exactly 2π.
        if az >= TAU {
            az = 0.0;
        }
        az
    };
    SphericalDirection { azimuth, elevation }
}

/// Converts spherical coordinates back to a unit ray.
pub fn ray_of(s: &SphericalDirection) -> UnitRay {
    let (se, ce) = s.elevation.sin_cos();
    let (sa, ca) = s.azimuth.sin_cos();
    UnitRay { dx: ce * ca, dy: ce * sa, dz: se }
}

/// Great-circle angle between two unit rays, in radians. Uses the
/// `atan2(|a x b|, a . b)` form, which stays accurate for tiny angles where
/// `acos` of the dot product loses half the mantissa.
pub fn angular_distance(a: &UnitRay, b: &UnitRay) -> f64 {
    let cx = a.dy * b.dz - a.dz * b.dy;
    let cy = a.dz * b.dx - a.dx * b.dz;
    let cz = a.dx * b.dy - a.dy * b.dx;
    let sin = (cx * cx + cy * cy + cz * cz).sqrt();
    sin.atan2(a.dot(b))
}

/// Wraps an angle to `(-π, π]`. Idempotent.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

/// Detection and annotation categories. Vans count as trucks upstream, so
/// only these five names are ever valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Car,
    Truck,
    Pedestrian,
    Bicyclist,
    Motorcyclist,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Car,
        Category::Truck,
        Category::Pedestrian,
        Category::Bicyclist,
        Category::Motorcyclist,
    ];

    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        match self {
            Category::Car => 0,
            Category::Truck => 1,
            Category::Pedestrian => 2,
            Category::Bicyclist => 3,
            Category::Motorcyclist => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Car => "Car",
            Category::Truck => "Truck",
            Category::Pedestrian => "Pedestrian",
            Category::Bicyclist => "Bicyclist",
            Category::Motorcyclist => "Motorcyclist",
        }
    }

    /// Case-sensitive name lookup; anything unrecognized is `None`.
    pub fn parse(name: &str) -> Option<Category> {
        Category::ALL.iter().copied().find(|c| c.as_str() == name)
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An oriented 3-D box: center position, extents, and heading. `length`
/// runs along the heading axis, `width` across it, `height` along z; `yaw`
/// is counter-clockwise about +z from +x and is stored wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectAnnotation {
    pub category: Category,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub width: f64,
    pub length: f64,
    pub height: f64,
    pub yaw: f64,
}

impl ObjectAnnotation {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        category: Category,
        x: f64,
        y: f64,
        z: f64,
        width: f64,
        length: f64,
        height: f64,
        yaw: f64,
    ) -> Result<Self, GeomError> {
        let fields = [x, y, z, width, length, height, yaw];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidAnnotation("non-finite field".into()));
        }
        if width <= 0.0 || length <= 0.0 || height <= 0.0 {
            return Err(GeomError::InvalidAnnotation(format!(
                "box dimensions must be positive, got {width} x {length} x {height}"
            )));
        }
        Ok(Self { category, x, y, z, width, length, height, yaw: wrap_angle(yaw) })
    }

    /// Distance of the box center from the origin in the ground plane.
    pub fn planar_range(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.width * self.length * self.height
    }
}

/// An annotation emitted by a detector, with a confidence score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub annotation: ObjectAnnotation,
    pub score: f64,
}

impl Detection {
    pub fn new(annotation: ObjectAnnotation, score: f64) -> Result<Self, GeomError> {
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(GeomError::InvalidDetection(format!(
                "score must lie in [0, 1], got {score}"
            )));
        }
        Ok(Self { annotation, score })
    }
}
