//! File formats: binary point clouds, ray-pattern files, annotation
//! records, triangle meshes, scene descriptions, and dataset manifests.
//!
//! Every reader returns [`IoError`]. Operating-system failures pass through
//! as [`IoError::Io`]; everything else means the file itself is wrong
//! (truncated, malformed, or semantically invalid) and carries the path and
//! enough detail to fix it. [`IoError::exit_code`] maps the two classes to
//! the conventional process exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub mod annotations;
pub mod cloud;
pub mod manifest;
pub mod mesh;
pub mod pattern_file;
pub mod scene_file;

pub use annotations::{
    read_detections, read_ground_truth, write_detections, write_ground_truth,
};
pub use cloud::{read_cloud, read_normals, write_cloud, write_normals};
pub use manifest::{dataset_stats, read_manifest, write_manifest, DatasetStats, Manifest, ManifestGroup};
pub use mesh::read_mesh;
pub use pattern_file::{read_pattern, write_pattern};
pub use scene_file::read_scene;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{}: truncated file: {detail}", path.display())]
    TruncatedFile { path: PathBuf, detail: String },
    #[error("{}: malformed header: {detail}", path.display())]
    MalformedHeader { path: PathBuf, detail: String },
    #[error("{}:{line}: {detail}", path.display())]
    MalformedLine { path: PathBuf, line: usize, detail: String },
    #[error("{}: {detail}", path.display())]
    MalformedRecord { path: PathBuf, detail: String },
    #[error("{}:{line}: unknown category {name:?}", path.display())]
    UnknownCategory { path: PathBuf, line: usize, name: String },
    #[error("{}: malformed mesh: {detail}", path.display())]
    MalformedMesh { path: PathBuf, detail: String },
    #[error("{}:{line}: detection record is missing its score", path.display())]
    MissingScore { path: PathBuf, line: usize },
}

impl IoError {
    /// Process exit code for this failure: 1 for operating-system errors,
    /// 2 for anything wrong with the file contents.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Io(_) => 1,
            _ => 2,
        }
    }
}
