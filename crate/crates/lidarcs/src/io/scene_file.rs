//! Scene description files.
//!
//! ```text
//! # comment
//! background <cloud_path>
//! background-normals <normals_path>
//! object <mesh_path> <category> <x> <y> <z> <yaw> <width> <length> <height>
//! ```
//!
//! Exactly one `background` line is required; `background-normals` is
//! optional and must match the background point count. Object poses are in
//! the sensor frame with `yaw` in radians; `<x> <y> <z>` anchors the center
//! of the box bottom. All paths resolve relative to the scene file's
//! directory, so a scene directory can be moved as a unit.

use std::fs;
use std::path::Path;

use crate::geom::Category;
use crate::scene::{PlacedObject, Scene};

use super::{cloud, mesh, IoError};

/// Loads a scene and everything it references.
pub fn read_scene(path: &Path) -> Result<Scene, IoError> {
    let text = fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut background = None;
    let mut normals = None;
    let mut objects = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_err = |detail: String| IoError::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "background" => {
                if fields.len() != 2 {
                    return Err(line_err("expected `background <path>`".into()));
                }
                if background.is_some() {
                    return Err(line_err("duplicate background line".into()));
                }
                background = Some(cloud::read_cloud(&base.join(fields[1]))?);
            }
            "background-normals" => {
                if fields.len() != 2 {
                    return Err(line_err("expected `background-normals <path>`".into()));
                }
                if normals.is_some() {
                    return Err(line_err("duplicate background-normals line".into()));
                }
                normals = Some(cloud::read_normals(&base.join(fields[1]))?);
            }
            "object" => {
                if fields.len() != 10 {
                    return Err(line_err(format!(
                        "expected `object <mesh> <category> <x> <y> <z> <yaw> <w> <l> <h>`, got {} fields",
                        fields.len()
                    )));
                }
                let mesh = mesh::read_mesh(&base.join(fields[1]))?;
                let category =
                    Category::parse(fields[2]).ok_or_else(|| IoError::UnknownCategory {
                        path: path.to_path_buf(),
                        line: i + 1,
                        name: fields[2].to_string(),
                    })?;
                let mut numbers = [0.0f64; 7];
                for (slot, token) in numbers.iter_mut().zip(&fields[3..]) {
                    *slot = token
                        .parse()
                        .map_err(|_| line_err(format!("bad number {token:?}")))?;
                }
                let [x, y, z, yaw, width, length, height] = numbers;
                let object =
                    PlacedObject::new(mesh, [x, y, z], yaw, category, [width, length, height])
                        .map_err(|e| line_err(e.to_string()))?;
                objects.push(object);
            }
            other => {
                return Err(line_err(format!("unknown directive {other:?}")));
            }
        }
    }
    let background = background.ok_or_else(|| IoError::MalformedRecord {
        path: path.to_path_buf(),
        detail: "scene has no background line".into(),
    })?;
    if let Some(ref n) = normals {
        if n.len() != background.len() {
            return Err(IoError::MalformedRecord {
                path: path.to_path_buf(),
                detail: format!(
                    "{} normals for {} background points",
                    n.len(),
                    background.len()
                ),
            });
        }
    }
    let mut scene = Scene::new(background);
    scene.background_normals = normals;
    Ok(scene.with_objects(objects))
}
