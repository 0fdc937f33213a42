//! Triangle-mesh loading: Wavefront OBJ and Stanford PLY.
//!
//! Both loaders accept triangles only — a quad or larger face is an error,
//! not something to tessellate silently. OBJ reads `v` and `f` directives
//! and ignores the rest (normals, texture coordinates, grouping, materials).
//! PLY supports `ascii` and `binary_little_endian` layouts, float or double
//! vertex coordinates, and skips any extra per-vertex or per-face
//! properties it does not understand.

use std::fs;
use std::path::Path;

use crate::geom::Point3;
use crate::scene::TriangleMesh;

use super::IoError;

/// Loads a mesh, dispatching on the (case-insensitive) file extension:
/// `.obj` or `.ply`.
pub fn read_mesh(path: &Path) -> Result<TriangleMesh, IoError> {
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match extension.as_deref() {
        Some("obj") => read_obj(path),
        Some("ply") => read_ply(path),
        _ => Err(IoError::MalformedMesh {
            path: path.to_path_buf(),
            detail: "unsupported mesh format (expected .obj or .ply)".into(),
        }),
    }
}

fn mesh_err(path: &Path, detail: impl Into<String>) -> IoError {
    IoError::MalformedMesh {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn validated(path: &Path, mesh: TriangleMesh) -> Result<TriangleMesh, IoError> {
    mesh.validate().map_err(|e| mesh_err(path, e.to_string()))?;
    Ok(mesh)
}

// ---------------------------------------------------------------------------
// OBJ.

fn read_obj(path: &Path) -> Result<TriangleMesh, IoError> {
    let text = fs::read_to_string(path)?;
    let mut mesh = TriangleMesh::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut tokens = line.split_whitespace();
        let err = |detail: String| IoError::MalformedMesh {
            path: path.to_path_buf(),
            detail: format!("line {}: {detail}", i + 1),
        };
        match tokens.next() {
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(err(format!("vertex with {} coordinates", coords.len())));
                }
                let mut xyz = [0.0f64; 3];
                for (slot, token) in xyz.iter_mut().zip(&coords) {
                    *slot = token
                        .parse()
                        .map_err(|_| err(format!("bad coordinate {token:?}")))?;
                }
                mesh.vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(err(format!(
                        "face with {} vertices; only triangles are supported",
                        refs.len()
                    )));
                }
                let mut tri = [0u32; 3];
                for (slot, token) in tri.iter_mut().zip(&refs) {
                    // `f 3`, `f 3/1`, `f 3//2`, `f 3/1/2` all reference
                    // vertex 3; only the leading index matters here.
                    let index_part = token.split('/').next().unwrap_or_default();
                    let index: i64 = index_part
                        .parse()
                        .map_err(|_| err(format!("bad vertex reference {token:?}")))?;
                    if index < 1 || index > u32::MAX as i64 {
                        return Err(err(format!("vertex reference {index} out of range")));
                    }
                    *slot = (index - 1) as u32;
                }
                mesh.triangles.push(tri);
            }
            // Normals, texture coordinates, groups, materials, comments.
            _ => {}
        }
    }
    validated(path, mesh)
}

// ---------------------------------------------------------------------------
// PLY.

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(token: &str) -> Option<Scalar> {
        Some(match token {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }

    fn decode(self, bytes: &[u8]) -> f64 {
        match self {
            Scalar::I8 => bytes[0] as i8 as f64,
            Scalar::U8 => bytes[0] as f64,
            Scalar::I16 => i16::from_le_bytes(bytes.try_into().unwrap()) as f64,
            Scalar::U16 => u16::from_le_bytes(bytes.try_into().unwrap()) as f64,
            Scalar::I32 => i32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(bytes.try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { kind: Scalar, name: String },
    List { count: Scalar, item: Scalar, name: String },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

struct PlyHeader {
    format: PlyFormat,
    elements: Vec<Element>,
    /// Byte offset of the first data byte after `end_header`.
    body_start: usize,
}

fn parse_ply_header(path: &Path, data: &[u8]) -> Result<PlyHeader, IoError> {
    // The header is ASCII text terminated by an `end_header` line; scan it
    // line by line without touching the (possibly binary) body.
    let mut offset = 0usize;
    let mut lines = Vec::new();
    loop {
        let rest = &data[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| mesh_err(path, "missing end_header"))?;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| mesh_err(path, "non-UTF-8 header"))?
            .trim_end_matches('\r')
            .to_string();
        offset += end + 1;
        let done = line.trim() == "end_header";
        lines.push(line);
        if done {
            break;
        }
    }
    let mut it = lines.iter().map(|l| l.trim());
    if it.next() != Some("ply") {
        return Err(mesh_err(path, "missing `ply` magic line"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in it {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                format = Some(match tokens.next() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(mesh_err(
                            path,
                            format!("unsupported format {:?}", other.unwrap_or("")),
                        ))
                    }
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| mesh_err(path, "element without a name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| mesh_err(path, format!("element {name} without a count")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| mesh_err(path, "property before any element"))?;
                let kind = tokens
                    .next()
                    .ok_or_else(|| mesh_err(path, "property without a type"))?;
                let property = if kind == "list" {
                    let count = tokens.next().and_then(Scalar::parse);
                    let item = tokens.next().and_then(Scalar::parse);
                    let name = tokens.next();
                    match (count, item, name) {
                        (Some(count), Some(item), Some(name))
                            if count.is_integer() && item.is_integer() =>
                        {
                            Property::List { count, item, name: name.to_string() }
                        }
                        _ => return Err(mesh_err(path, format!("bad list property {line:?}"))),
                    }
                } else {
                    let kind = Scalar::parse(kind)
                        .ok_or_else(|| mesh_err(path, format!("unknown type {kind:?}")))?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| mesh_err(path, "property without a name"))?;
                    Property::Scalar { kind, name: name.to_string() }
                };
                element.properties.push(property);
            }
            // comment / obj_info / end_header / blank.
            _ => {}
        }
    }
    Ok(PlyHeader {
        format: format.ok_or_else(|| mesh_err(path, "missing format line"))?,
        elements,
        body_start: offset,
    })
}

/// Position of the x/y/z scalar properties inside the vertex element.
fn vertex_axes(path: &Path, element: &Element) -> Result<[usize; 3], IoError> {
    let mut axes = [usize::MAX; 3];
    for (i, p) in element.properties.iter().enumerate() {
        if let Property::Scalar { kind, name } = p {
            if let Some(axis) = ["x", "y", "z"].iter().position(|a| a == name) {
                if kind.is_integer() {
                    return Err(mesh_err(path, format!("vertex {name} must be float or double")));
                }
                axes[axis] = i;
            }
        }
    }
    if axes.contains(&usize::MAX) {
        return Err(mesh_err(path, "vertex element lacks x/y/z properties"));
    }
    Ok(axes)
}

fn is_index_list(p: &Property) -> bool {
    matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index")
}

fn push_triangle(path: &Path, mesh: &mut TriangleMesh, indices: &[f64]) -> Result<(), IoError> {
    if indices.len() != 3 {
        return Err(mesh_err(
            path,
            format!("face with {} vertices; only triangles are supported", indices.len()),
        ));
    }
    let mut tri = [0u32; 3];
    for (slot, &value) in tri.iter_mut().zip(indices) {
        if value < 0.0 || value > u32::MAX as f64 {
            return Err(mesh_err(path, format!("vertex index {value} out of range")));
        }
        *slot = value as u32;
    }
    mesh.triangles.push(tri);
    Ok(())
}

fn read_ply(path: &Path) -> Result<TriangleMesh, IoError> {
    let data = fs::read(path)?;
    let header = parse_ply_header(path, &data)?;
    let mut mesh = TriangleMesh::default();
    match header.format {
        PlyFormat::Ascii => read_ply_ascii(path, &data[header.body_start..], &header, &mut mesh)?,
        PlyFormat::BinaryLittleEndian => {
            read_ply_binary(path, &data[header.body_start..], &header, &mut mesh)?
        }
    }
    validated(path, mesh)
}

fn read_ply_ascii(
    path: &Path,
    body: &[u8],
    header: &PlyHeader,
    mesh: &mut TriangleMesh,
) -> Result<(), IoError> {
    let text = std::str::from_utf8(body).map_err(|_| mesh_err(path, "non-UTF-8 ascii body"))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    for element in &header.elements {
        let axes = (element.name == "vertex").then(|| vertex_axes(path, element)).transpose()?;
        for _ in 0..element.count {
            let line = lines
                .next()
                .ok_or_else(|| mesh_err(path, format!("missing {} rows", element.name)))?;
            let mut tokens = line.split_whitespace();
            let mut next_number = |what: &str| -> Result<f64, IoError> {
                tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| mesh_err(path, format!("bad or missing {what} in {line:?}")))
            };
            let mut scalars = vec![0.0f64; element.properties.len()];
            let mut face: Option<Vec<f64>> = None;
            for (i, property) in element.properties.iter().enumerate() {
                match property {
                    Property::Scalar { .. } => scalars[i] = next_number("value")?,
                    Property::List { .. } => {
                        let count = next_number("list count")? as usize;
                        let mut items = Vec::with_capacity(count);
                        for _ in 0..count {
                            items.push(next_number("list item")?);
                        }
                        if is_index_list(property) {
                            face = Some(items);
                        }
                    }
                }
            }
            if let Some(axes) = axes {
                mesh.vertices.push(Point3::new(
                    scalars[axes[0]],
                    scalars[axes[1]],
                    scalars[axes[2]],
                ));
            } else if element.name == "face" {
                let indices = face
                    .ok_or_else(|| mesh_err(path, "face element lacks a vertex index list"))?;
                push_triangle(path, mesh, &indices)?;
            }
        }
    }
    Ok(())
}

/// Advances `pos` past `n` bytes of `body`, failing cleanly at the end.
fn take<'a>(path: &Path, body: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8], IoError> {
    let truncated = || IoError::TruncatedFile {
        path: path.to_path_buf(),
        detail: format!("binary body ends inside a record (offset {pos})"),
    };
    let end = pos.checked_add(n).ok_or_else(truncated)?;
    let slice = body.get(*pos..end).ok_or_else(truncated)?;
    *pos = end;
    Ok(slice)
}

fn read_ply_binary(
    path: &Path,
    body: &[u8],
    header: &PlyHeader,
    mesh: &mut TriangleMesh,
) -> Result<(), IoError> {
    let mut pos = 0usize;
    for element in &header.elements {
        let axes = (element.name == "vertex").then(|| vertex_axes(path, element)).transpose()?;
        for _ in 0..element.count {
            let mut scalars = vec![0.0f64; element.properties.len()];
            let mut face: Option<Vec<f64>> = None;
            for (i, property) in element.properties.iter().enumerate() {
                match property {
                    Property::Scalar { kind, .. } => {
                        scalars[i] = kind.decode(take(path, body, &mut pos, kind.size())?);
                    }
                    Property::List { count, item, .. } => {
                        let n = count.decode(take(path, body, &mut pos, count.size())?) as usize;
                        let mut items = Vec::with_capacity(n.min(1024));
                        for _ in 0..n {
                            items.push(item.decode(take(path, body, &mut pos, item.size())?));
                        }
                        if is_index_list(property) {
                            face = Some(items);
                        }
                    }
                }
            }
            if let Some(axes) = axes {
                mesh.vertices.push(Point3::new(
                    scalars[axes[0]],
                    scalars[axes[1]],
                    scalars[axes[2]],
                ));
            } else if element.name == "face" {
                let indices = face
                    .ok_or_else(|| mesh_err(path, "face element lacks a vertex index list"))?;
                push_triangle(path, mesh, &indices)?;
            }
        }
    }
    Ok(())
}
