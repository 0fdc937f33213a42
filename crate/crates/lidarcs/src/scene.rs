//! Scene rendering into a depth cube map and ray-pattern queries against it.
//!
//! A scene is a dense background point cloud plus posed foreground meshes,
//! all in the sensor frame (the sensor sits at the origin; a flat ground
//! recorded by a sensor mounted 2 m up sits at z = -2). Rendering projects
//! everything onto the six faces of a unit cube around the origin. Each
//! face is a square raster with a 90-degree field of view; every pixel
//! stores the smallest distance-from-origin among contributors, or
//! [`NO_RETURN`] when nothing covers it. Querying a ray pattern then reduces
//! to one pixel lookup per ray, so many sensor models can be simulated from
//! one render of the scene.
//!
//! Background points are drawn as screen-space disc splats. By default a
//! splat writes its generating point's range into every covered pixel. When
//! the scene carries per-point surface normals, the splat instead writes the
//! distance to the point's tangent plane along each pixel ray, which keeps
//! surfaces seen at grazing angles (roads far ahead) accurate; a constant
//! depth across the disc is off by up to `splat_radius / tan(incidence)`
//! there, which dwarfs the splat radius itself. Foreground meshes are
//! rasterized triangle by triangle with exact ray-plane depths.

use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{
    range_of, ray_of, Category, ObjectAnnotation, Point3, PointCloud, UnitRay,
    DEGENERATE_RANGE_EPSILON,
};
use crate::pattern::RayPattern;

/// Sentinel depth for pixels no scene element covers.
pub const NO_RETURN: f32 = f32::INFINITY;

/// Minimum distance from the origin at which geometry is rendered.
const NEAR_CLIP: f64 = 1e-6;

/// Depths beyond this are treated as numerical noise and dropped.
const FAR_CLIP: f64 = 1e9;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("scene background cloud is empty")]
    EmptyScene,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid object: {0}")]
    InvalidObject(String),
}

// ---------------------------------------------------------------------------
// Small [f64; 3] vector helpers; the math here is too simple to warrant a
// linear-algebra dependency.

#[inline]
fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

// ---------------------------------------------------------------------------
// Cube-face geometry. Faces are ordered +x, -x, +y, -y, +z, -z; ties in the
// dominant-axis test resolve in that order so rays on seams always land on
// one well-defined face. Within a face, texel coordinates come from
// projecting onto the listed (u, v) axes at unit perpendicular distance.

const FACE_N: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

const FACE_U: [[f64; 3]; 6] = [
    [0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
];

const FACE_V: [[f64; 3]; 6] = [
    [0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0],
];

/// Face whose axis has the largest magnitude in `d`; ties pick the earliest
/// face in +x, -x, +y, -y, +z, -z order.
fn dominant_face(d: &UnitRay) -> usize {
    let (ax, ay, az) = (d.dx().abs(), d.dy().abs(), d.dz().abs());
    if ax >= ay && ax >= az {
        if d.dx() > 0.0 {
            0
        } else {
            1
        }
    } else if ay >= az {
        if d.dy() > 0.0 {
            2
        } else {
            3
        }
    } else if d.dz() > 0.0 {
        4
    } else {
        5
    }
}

#[inline]
fn pixel_index(coord: f64, resolution: usize) -> usize {
    let p = ((coord + 1.0) * 0.5 * resolution as f64).floor();
    (p.max(0.0) as usize).min(resolution - 1)
}

/// Unnormalized direction through the center of pixel `(px, py)` of `face`.
#[inline]
fn pixel_center_dir(face: usize, px: f64, py: f64, resolution: usize) -> [f64; 3] {
    let u = (px + 0.5) / resolution as f64 * 2.0 - 1.0;
    let v = (py + 0.5) / resolution as f64 * 2.0 - 1.0;
    let n = FACE_N[face];
    let eu = FACE_U[face];
    let ev = FACE_V[face];
    [
        n[0] + u * eu[0] + v * ev[0],
        n[1] + u * eu[1] + v * ev[1],
        n[2] + u * eu[2] + v * ev[2],
    ]
}

// ---------------------------------------------------------------------------
// Scene types.

/// An indexed triangle mesh in its own object frame: origin at the center
/// of the box footprint, x along the heading, z up from the box bottom.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn validate(&self) -> Result<(), SceneError> {
        for v in &self.vertices {
            if !v.is_finite() {
                return Err(SceneError::InvalidObject("non-finite mesh vertex".into()));
            }
        }
        for tri in &self.triangles {
            for &i in tri {
                if i as usize >= self.vertices.len() {
                    return Err(SceneError::InvalidObject(format!(
                        "triangle index {i} out of range ({} vertices)",
                        self.vertices.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A mesh posed in the sensor frame along with the box annotation it fills.
/// `position` is the center of the box bottom; `dims` is
/// `[width, length, height]` with length along the heading axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedObject {
    pub mesh: TriangleMesh,
    pub position: [f64; 3],
    pub yaw: f64,
    pub category: Category,
    pub dims: [f64; 3],
}

impl PlacedObject {
    /// Fractional slack allowed when checking that the mesh fits its box.
    const FIT_SLACK: f64 = 0.01;

    pub fn new(
        mesh: TriangleMesh,
        position: [f64; 3],
        yaw: f64,
        category: Category,
        dims: [f64; 3],
    ) -> Result<Self, SceneError> {
        mesh.validate()?;
        let [width, length, height] = dims;
        if !(width > 0.0 && length > 0.0 && height > 0.0)
            || !dims.iter().all(|d| d.is_finite())
        {
            return Err(SceneError::InvalidObject(format!(
                "box dimensions must be positive, got {width} x {length} x {height}"
            )));
        }
        if !position.iter().all(|p| p.is_finite()) || !yaw.is_finite() {
            return Err(SceneError::InvalidObject("non-finite pose".into()));
        }
        // The mesh must fit the annotation box (object frame: x within
        // +-length/2, y within +-width/2, z in [0, height]) with 1% slack
        // per axis.
        let sx = length * Self::FIT_SLACK;
        let sy = width * Self::FIT_SLACK;
        let sz = height * Self::FIT_SLACK;
        for v in &mesh.vertices {
            let ok = v.x.abs() <= length / 2.0 + sx
                && v.y.abs() <= width / 2.0 + sy
                && v.z >= -sz
                && v.z <= height + sz;
            if !ok {
                return Err(SceneError::InvalidObject(format!(
                    "mesh vertex ({}, {}, {}) lies outside the {width} x {length} x {height} box",
                    v.x, v.y, v.z
                )));
            }
        }
        Ok(Self { mesh, position, yaw: crate::geom::wrap_angle(yaw), category, dims })
    }

    /// Box annotation of this object: center position (half the height above
    /// the bottom anchor), extents, and heading.
    pub fn annotation(&self) -> ObjectAnnotation {
        ObjectAnnotation::new(
            self.category,
            self.position[0],
            self.position[1],
            self.position[2] + self.dims[2] / 2.0,
            self.dims[0],
            self.dims[1],
            self.dims[2],
            self.yaw,
        )
        .expect("placed object was validated at construction")
    }

    /// Triangles transformed into the sensor frame.
    fn world_triangles(&self) -> Vec<[[f64; 3]; 3]> {
        let (sin, cos) = self.yaw.sin_cos();
        let transform = |p: &Point3| -> [f64; 3] {
            [
                cos * p.x - sin * p.y + self.position[0],
                sin * p.x + cos * p.y + self.position[1],
                p.z + self.position[2],
            ]
        };
        self.mesh
            .triangles
            .iter()
            .map(|tri| {
                [
                    transform(&self.mesh.vertices[tri[0] as usize]),
                    transform(&self.mesh.vertices[tri[1] as usize]),
                    transform(&self.mesh.vertices[tri[2] as usize]),
                ]
            })
            .collect()
    }
}

/// A sensor-frame scene: dense background points plus posed objects.
/// `background_normals`, when present, holds one unit surface normal per
/// background point (orientation sign does not matter) and switches splats
/// to tangent-plane depths.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub background: PointCloud,
    pub background_normals: Option<Vec<[f64; 3]>>,
    pub objects: Vec<PlacedObject>,
}

impl Scene {
    pub fn new(background: PointCloud) -> Self {
        Self { background, background_normals: None, objects: Vec::new() }
    }

    pub fn with_normals(mut self, normals: Vec<[f64; 3]>) -> Self {
        self.background_normals = Some(normals);
        self
    }

    pub fn with_objects(mut self, objects: Vec<PlacedObject>) -> Self {
        self.objects = objects;
        self
    }
}

/// Six square depth rasters around the origin. Depths are distances from
/// the origin along the pixel ray (not perpendicular face distances), in
/// meters, with [`NO_RETURN`] where nothing was rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthCubeMap {
    faces: [Vec<f32>; 6],
    face_resolution: usize,
    degenerate_points: usize,
}

impl DepthCubeMap {
    pub fn face_resolution(&self) -> usize {
        self.face_resolution
    }

    /// Background points skipped during rendering because they sat at the
    /// origin.
    pub fn degenerate_points(&self) -> usize {
        self.degenerate_points
    }

    pub fn face(&self, face: usize) -> &[f32] {
        &self.faces[face]
    }

    pub fn depth_at(&self, face: usize, px: usize, py: usize) -> f32 {
        self.faces[face][py * self.face_resolution + px]
    }

    /// Depth stored for the pixel this direction falls into.
    pub fn sample(&self, dir: &UnitRay) -> f32 {
        let face = dominant_face(dir);
        let d = [dir.dx(), dir.dy(), dir.dz()];
        let t = dot3(d, FACE_N[face]);
        let u = dot3(d, FACE_U[face]) / t;
        let v = dot3(d, FACE_V[face]) / t;
        let px = pixel_index(u, self.face_resolution);
        let py = pixel_index(v, self.face_resolution);
        self.depth_at(face, px, py)
    }
}

// ---------------------------------------------------------------------------
// Rendering.

/// Work-in-progress cube map. Depths live in `AtomicU32` as f32 bit
/// patterns: all stored values are positive, and IEEE-754 positives compare
/// like their bit patterns, so a `fetch_min` on the bits is a z-buffer
/// write. Minimum is order-independent, which makes parallel rendering
/// bit-for-bit deterministic.
struct AtomicFaces {
    faces: [Vec<AtomicU32>; 6],
    resolution: usize,
}

impl AtomicFaces {
    fn new(resolution: usize) -> Self {
        let blank = NO_RETURN.to_bits();
        let make = || {
            let mut v = Vec::with_capacity(resolution * resolution);
            v.resize_with(resolution * resolution, || AtomicU32::new(blank));
            v
        };
        Self { faces: [make(), make(), make(), make(), make(), make()], resolution }
    }

    #[inline]
    fn write_min(&self, face: usize, px: usize, py: usize, depth: f64) {
        let bits = (depth as f32).to_bits();
        self.faces[face][py * self.resolution + px].fetch_min(bits, Ordering::Relaxed);
    }

    fn finish(self, degenerate_points: usize) -> DepthCubeMap {
        let faces = self.faces.map(|face| {
            face.into_iter()
                .map(|a| f32::from_bits(a.into_inner()))
                .collect()
        });
        DepthCubeMap { faces, face_resolution: self.resolution, degenerate_points }
    }
}

/// Splats one background point onto every face its disc touches. The disc
/// has the world radius `splat_radius` projected at the point's
/// perpendicular face distance, floored at one pixel.
fn splat_point(
    target: &AtomicFaces,
    p: [f64; 3],
    range: f64,
    normal: Option<[f64; 3]>,
    splat_radius: f64,
) {
    let w = target.resolution;
    let half = w as f64 / 2.0;
    for face in 0..6 {
        let t = dot3(p, FACE_N[face]);
        if t <= NEAR_CLIP {
            continue;
        }
        let u = dot3(p, FACE_U[face]) / t;
        let v = dot3(p, FACE_V[face]) / t;
        let r_px = (splat_radius * half / t).max(1.0);
        let fx = (u + 1.0) * half;
        let fy = (v + 1.0) * half;
        let x0 = (fx - r_px - 0.5).floor().max(0.0) as i64;
        let x1 = ((fx + r_px + 0.5).ceil() as i64).min(w as i64 - 1);
        let y0 = (fy - r_px - 0.5).floor().max(0.0) as i64;
        let y1 = ((fy + r_px + 0.5).ceil() as i64).min(w as i64 - 1);
        if x0 > x1 || y0 > y1 || fx - r_px > w as f64 || fy - r_px > w as f64 {
            continue;
        }
        let r_sq = r_px * r_px;
        for py in y0..=y1 {
            for px in x0..=x1 {
                let dx = px as f64 + 0.5 - fx;
                let dy = py as f64 + 0.5 - fy;
                if dx * dx + dy * dy > r_sq {
                    continue;
                }
                let depth = match normal {
                    // Constant depth across the disc.
                    None => range,
                    // Distance to the point's tangent plane along this
                    // pixel's ray; sign-insensitive in the normal.
                    Some(m) => {
                        let dir = pixel_center_dir(face, px as f64, py as f64, w);
                        let denom = dot3(dir, m);
                        if denom.abs() < 1e-12 {
                            continue;
                        }
                        dot3(p, m) * norm3(dir) / denom
                    }
                };
                if depth > NEAR_CLIP && depth < FAR_CLIP {
                    target.write_min(face, px as usize, py as usize, depth);
                }
            }
        }
    }
}

/// Clips a polygon to the half-space `dot(x, plane) >= offset`
/// (Sutherland-Hodgman step).
fn clip_halfspace(poly: &[[f64; 3]], plane: [f64; 3], offset: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let dc = dot3(cur, plane) - offset;
        let dp = dot3(prev, plane) - offset;
        if dp >= 0.0 && dc >= 0.0 {
            out.push(cur);
        } else if dp >= 0.0 && dc < 0.0 {
            let t = dp / (dp - dc);
            out.push([
                prev[0] + t * (cur[0] - prev[0]),
                prev[1] + t * (cur[1] - prev[1]),
                prev[2] + t * (cur[2] - prev[2]),
            ]);
        } else if dp < 0.0 && dc >= 0.0 {
            let t = dp / (dp - dc);
            out.push([
                prev[0] + t * (cur[0] - prev[0]),
                prev[1] + t * (cur[1] - prev[1]),
                prev[2] + t * (cur[2] - prev[2]),
            ]);
            out.push(cur);
        }
    }
    out
}

/// Rasterizes one world-space triangle onto every face it spans, writing
/// exact ray-plane intersection depths per covered pixel.
fn raster_triangle(target: &AtomicFaces, tri: &[[f64; 3]; 3]) {
    let w = target.resolution;
    let half = w as f64 / 2.0;
    let plane_n = cross3(sub3(tri[1], tri[0]), sub3(tri[2], tri[0]));
    if norm3(plane_n) < 1e-18 {
        return;
    }
    let plane_d = dot3(tri[0], plane_n);
    for face in 0..6 {
        let n = FACE_N[face];
        let eu = FACE_U[face];
        let ev = FACE_V[face];
        // Clip against the face frustum: in front of the near plane and
        // |u|, |v| <= 1 expressed as 3-D half-spaces through the origin.
        let mut poly = vec![tri[0], tri[1], tri[2]];
        poly = clip_halfspace(&poly, n, NEAR_CLIP);
        if poly.len() < 3 {
            continue;
        }
        for (su, sv) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let plane = [
                n[0] - su * eu[0] - sv * ev[0],
                n[1] - su * eu[1] - sv * ev[1],
                n[2] - su * eu[2] - sv * ev[2],
            ];
            poly = clip_halfspace(&poly, plane, 0.0);
            if poly.len() < 3 {
                break;
            }
        }
        if poly.len() < 3 {
            continue;
        }
        // Project to fractional pixel coordinates.
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
        let mut ok = true;
        for p in &poly {
            let t = dot3(*p, n);
            if t <= 0.0 {
                ok = false;
                break;
            }
            let u = dot3(*p, eu) / t;
            let v = dot3(*p, ev) / t;
            pts.push([(u + 1.0) * half, (v + 1.0) * half]);
        }
        if !ok || pts.len() < 3 {
            continue;
        }
        // Consistent counter-clockwise winding for the inside test.
        let area2: f64 = pts
            .windows(2)
            .map(|ab| ab[0][0] * ab[1][1] - ab[1][0] * ab[0][1])
            .sum::<f64>()
            + pts[pts.len() - 1][0] * pts[0][1]
            - pts[0][0] * pts[pts.len() - 1][1];
        if area2.abs() < 1e-12 {
            continue;
        }
        if area2 < 0.0 {
            pts.reverse();
        }
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            min_x = min_x.min(p[0]);
            max_x = max_x.max(p[0]);
            min_y = min_y.min(p[1]);
            max_y = max_y.max(p[1]);
        }
        let x0 = (min_x - 0.5).floor().max(0.0) as usize;
        let x1 = ((max_x + 0.5).ceil().max(0.0) as usize).min(w - 1);
        let y0 = (min_y - 0.5).floor().max(0.0) as usize;
        let y1 = ((max_y + 0.5).ceil().max(0.0) as usize).min(w - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let cx = px as f64 + 0.5;
                let cy = py as f64 + 0.5;
                let inside = pts.iter().enumerate().all(|(i, a)| {
                    let b = pts[(i + 1) % pts.len()];
                    (b[0] - a[0]) * (cy - a[1]) - (b[1] - a[1]) * (cx - a[0]) >= -1e-9
                });
                if !inside {
                    continue;
                }
                let dir = pixel_center_dir(face, px as f64, py as f64, w);
                let denom = dot3(dir, plane_n);
                if denom.abs() < 1e-18 {
                    continue;
                }
                let depth = plane_d * norm3(dir) / denom;
                if depth > NEAR_CLIP && depth < FAR_CLIP {
                    target.write_min(face, px, py, depth);
                }
            }
        }
    }
}

/// Renders a scene into a depth cube map.
///
/// Background points become disc splats (constant-depth, or tangent-plane
/// depth when the scene has normals); object meshes are rasterized exactly.
/// Points at the origin are skipped and counted in
/// [`DepthCubeMap::degenerate_points`]. The result is independent of thread
/// count and point order because pixels keep the minimum depth.
pub fn build_cube_map(
    scene: &Scene,
    face_resolution: usize,
    splat_radius: f64,
) -> Result<DepthCubeMap, SceneError> {
    if face_resolution < 64 {
        return Err(SceneError::InvalidInput(format!(
            "face_resolution must be at least 64, got {face_resolution}"
        )));
    }
    if !splat_radius.is_finite() || splat_radius <= 0.0 {
        return Err(SceneError::InvalidInput(format!(
            "splat_radius must be positive, got {splat_radius}"
        )));
    }
    if scene.background.is_empty() {
        return Err(SceneError::EmptyScene);
    }
    if let Some(normals) = &scene.background_normals {
        if normals.len() != scene.background.len() {
            return Err(SceneError::InvalidInput(format!(
                "{} normals for {} background points",
                normals.len(),
                scene.background.len()
            )));
        }
    }
    for object in &scene.objects {
        object.mesh.validate()?;
    }

    let target = AtomicFaces::new(face_resolution);
    let degenerate = AtomicUsize::new(0);
    let normals = scene.background_normals.as_deref();
    scene
        .background
        .points
        .par_iter()
        .enumerate()
        .for_each(|(i, point)| {
            let p = [point.x, point.y, point.z];
            let range = range_of(point);
            if !range.is_finite() || range <= DEGENERATE_RANGE_EPSILON {
                degenerate.fetch_add(1, Ordering::Relaxed);
                return;
            }
            splat_point(&target, p, range, normals.map(|n| n[i]), splat_radius);
        });

    let triangles: Vec<[[f64; 3]; 3]> = scene
        .objects
        .iter()
        .flat_map(|o| o.world_triangles())
        .collect();
    triangles
        .par_iter()
        .for_each(|tri| raster_triangle(&target, tri));

    Ok(target.finish(degenerate.load(Ordering::Relaxed)))
}

/// Reads one depth per pattern ray and keeps rays that hit something within
/// `max_range`: each kept ray becomes the point `depth * direction`. Output
/// points follow pattern order; rays with no return produce nothing.
pub fn query_pattern(cube: &DepthCubeMap, pattern: &RayPattern, max_range: f64) -> PointCloud {
    let mut points = Vec::with_capacity(pattern.len());
    for s in pattern.rays() {
        let dir = ray_of(s);
        let depth = cube.sample(&dir) as f64;
        if depth.is_finite() && depth <= max_range {
            points.push(Point3::new(dir.dx() * depth, dir.dy() * depth, dir.dz() * depth));
        }
    }
    let mut cloud = PointCloud::from_points("", points);
    cloud.sensor_id = Some(pattern.sensor_name.clone());
    cloud
}

/// Queries many patterns against one cube map, in parallel across patterns.
/// Results are bit-identical to calling [`query_pattern`] per pattern; the
/// expensive render is shared, so the marginal cost per extra sensor is one
/// lookup per ray.
pub fn query_patterns(
    cube: &DepthCubeMap,
    patterns: &[RayPattern],
    max_ranges: &[f64],
) -> Result<Vec<PointCloud>, SceneError> {
    if patterns.len() != max_ranges.len() {
        return Err(SceneError::InvalidInput(format!(
            "{} patterns but {} max ranges",
            patterns.len(),
            max_ranges.len()
        )));
    }
    Ok(patterns
        .par_iter()
        .zip(max_ranges.par_iter())
        .map(|(pattern, &max_range)| query_pattern(cube, pattern, max_range))
        .collect())
}

/// Box annotations of every placed object, in scene order. Annotations
/// depend only on object poses, never on which sensor looks at them.
pub fn annotate(scene: &Scene) -> Vec<ObjectAnnotation> {
    scene.objects.iter().map(|o| o.annotation()).collect()
}

/// Rendering parameters for [`simulate_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub face_resolution: usize,
    pub splat_radius: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { face_resolution: 2048, splat_radius: 0.05 }
    }
}

/// One simulated capture: a cloud per queried pattern plus the shared
/// ground-truth annotations.
#[derive(Debug, Clone)]
pub struct SimulatedFrame {
    pub clouds: Vec<PointCloud>,
    pub annotations: Vec<ObjectAnnotation>,
}

/// Renders the scene once and queries every pattern against it.
pub fn simulate_frame(
    scene: &Scene,
    patterns: &[RayPattern],
    max_ranges: &[f64],
    config: &RenderConfig,
) -> Result<SimulatedFrame, SceneError> {
    if patterns.is_empty() {
        return Err(SceneError::InvalidInput("no patterns to query".into()));
    }
    let cube = build_cube_map(scene, config.face_resolution, config.splat_radius)?;
    let clouds = query_patterns(&cube, patterns, max_ranges)?;
    Ok(SimulatedFrame { clouds, annotations: annotate(scene) })
}

// ---------------------------------------------------------------------------
// Procedural scene elements used by examples, tests, and dataset tooling.

pub mod shapes {
    //! Analytic backgrounds and boxy stand-in meshes.

    use std::f64::consts::PI;

    use crate::geom::{normalize_to_sphere, Point3, PointCloud};

    use super::TriangleMesh;

    /// Evenly distributed points on a sphere around the origin (golden-angle
    /// spiral), deterministic for a given count.
    pub fn fibonacci_sphere_cloud(radius: f64, count: usize, frame_id: &str) -> PointCloud {
        let golden = PI * (3.0 - 5f64.sqrt());
        let points = (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let ring = (1.0 - z * z).max(0.0).sqrt();
                let az = golden * i as f64;
                Point3::new(radius * ring * az.cos(), radius * ring * az.sin(), radius * z)
            })
            .collect();
        PointCloud::from_points(frame_id, points)
    }

    /// Unit normals pointing along each point's own direction from the
    /// origin (a sphere's exact surface normals). Degenerate points get +z.
    pub fn radial_normals(cloud: &PointCloud) -> Vec<[f64; 3]> {
        cloud
            .points
            .iter()
            .map(|p| match normalize_to_sphere(p) {
                Ok(r) => [r.dx(), r.dy(), r.dz()],
                Err(_) => [0.0, 0.0, 1.0],
            })
            .collect()
    }

    /// A flat ground disc `drop` meters below the sensor, sampled on a
    /// Cartesian grid, with matching +z normals.
    pub fn ground_plane_grid(
        drop: f64,
        grid_step: f64,
        max_radius: f64,
        frame_id: &str,
    ) -> (PointCloud, Vec<[f64; 3]>) {
        let n = (max_radius / grid_step).floor() as i64;
        let r_sq = max_radius * max_radius;
        let mut points = Vec::new();
        for iy in -n..=n {
            let y = iy as f64 * grid_step;
            for ix in -n..=n {
                let x = ix as f64 * grid_step;
                if x * x + y * y <= r_sq {
                    points.push(Point3::new(x, y, -drop));
                }
            }
        }
        let normals = vec![[0.0, 0.0, 1.0]; points.len()];
        (PointCloud::from_points(frame_id, points), normals)
    }

    /// A closed axis-aligned cuboid in the object frame: x in
    /// `[-length/2, length/2]`, y in `[-width/2, width/2]`, z in
    /// `[0, height]`. Twelve triangles.
    pub fn box_mesh(width: f64, length: f64, height: f64) -> TriangleMesh {
        let hx = length / 2.0;
        let hy = width / 2.0;
        let vertices = vec![
            Point3::new(-hx, -hy, 0.0),
            Point3::new(hx, -hy, 0.0),
            Point3::new(hx, hy, 0.0),
            Point3::new(-hx, hy, 0.0),
            Point3::new(-hx, -hy, height),
            Point3::new(hx, -hy, height),
            Point3::new(hx, hy, height),
            Point3::new(-hx, hy, height),
        ];
        let triangles = vec![
            // bottom, top
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            // sides
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriangleMesh { vertices, triangles }
    }
}
