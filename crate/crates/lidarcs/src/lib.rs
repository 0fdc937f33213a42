//! Cross-sensor LiDAR point-cloud simulation toolkit.
//!
//! The pipeline recovers the angular ray pattern of a spinning LiDAR from
//! recorded sweeps, renders dense scenes into a depth cube map centered on
//! the sensor, and queries that map with any ray pattern to produce clouds
//! as other sensor models would have captured them. Companion modules
//! retarget real clouds between beam layouts and score 3-D detections with
//! an orientation-aware mean-average-precision metric.
//!
//! Entry points:
//! - [`pattern`]: ray-pattern extraction, synthesis, and beam decomposition
//! - [`scene`]: depth cube-map rendering and pattern queries
//! - [`resample`]: nearest-neighbor beam retargeting of recorded clouds
//! - [`eval`]: rotated-box IoU and mAP scoring of detections
//! - [`io`]: binary clouds, pattern/annotation text files, meshes, manifests

pub mod eval;
pub mod geom;
pub mod io;
pub mod pattern;
pub mod resample;
pub mod scene;
