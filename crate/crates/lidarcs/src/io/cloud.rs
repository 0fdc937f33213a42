//! Binary point-cloud and normal files.
//!
//! A cloud file is a flat sequence of little-endian `f32` quadruples
//! `(x, y, z, intensity)`, one per point, with no header; its length must
//! be a multiple of 16 bytes. A normals file is the same idea with
//! `(nx, ny, nz)` triples and 12-byte records. The frame id of a loaded
//! cloud is the file stem (`000042.bin` loads as frame `000042`).

use std::fs;
use std::path::Path;

use crate::geom::{Point3, PointCloud};

use super::IoError;

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cloud")
        .to_string()
}

/// Reads a binary cloud file. Coordinates widen losslessly from `f32`.
pub fn read_cloud(path: &Path) -> Result<PointCloud, IoError> {
    let data = fs::read(path)?;
    if data.len() % 16 != 0 {
        return Err(IoError::TruncatedFile {
            path: path.to_path_buf(),
            detail: format!("{} bytes is not a whole number of 16-byte points", data.len()),
        });
    }
    let points = data
        .chunks_exact(16)
        .map(|chunk| {
            let field = |i: usize| {
                f32::from_le_bytes(chunk[i * 4..i * 4 + 4].try_into().unwrap()) as f64
            };
            Point3::with_intensity(field(0), field(1), field(2), field(3))
        })
        .collect();
    Ok(PointCloud::from_points(file_stem(path), points))
}

/// Writes a binary cloud file. Coordinates narrow to `f32`; a cloud that
/// came from [`read_cloud`] writes back bit-identically.
pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), IoError> {
    let mut data = Vec::with_capacity(cloud.len() * 16);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            data.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, data)?;
    Ok(())
}

/// Reads a binary normals file of little-endian `f32` triples.
pub fn read_normals(path: &Path) -> Result<Vec<[f64; 3]>, IoError> {
    let data = fs::read(path)?;
    if data.len() % 12 != 0 {
        return Err(IoError::TruncatedFile {
            path: path.to_path_buf(),
            detail: format!("{} bytes is not a whole number of 12-byte normals", data.len()),
        });
    }
    Ok(data
        .chunks_exact(12)
        .map(|chunk| {
            let field = |i: usize| {
                f32::from_le_bytes(chunk[i * 4..i * 4 + 4].try_into().unwrap()) as f64
            };
            [field(0), field(1), field(2)]
        })
        .collect())
}

/// Writes a binary normals file.
pub fn write_normals(path: &Path, normals: &[[f64; 3]]) -> Result<(), IoError> {
    let mut data = Vec::with_capacity(normals.len() * 12);
    for n in normals {
        for &v in n {
            data.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, data)?;
    Ok(())
}
