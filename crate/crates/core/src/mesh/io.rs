//! OBJ and PLY readers/writers.
//!
//! OBJ: `v`/`f` records, 1-based indices, no material handling. PLY:
//! ASCII and binary little-endian, with optional `red`/`green`/`blue`
//! uchar vertex properties. Binary little-endian is the canonical
//! interchange format written for `.ply` paths.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{MeshError, TriangleMesh};
use crate::Point3;

fn io_err(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Load an OBJ or PLY mesh, dispatching on the file extension.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh, MeshError> {
    match extension(path)?.as_str() {
        "obj" => load_obj(path),
        "ply" => load_ply(path),
        other => Err(MeshError::UnsupportedFormat(other.to_string())),
    }
}

/// Save a mesh as OBJ or PLY (binary little-endian) based on the extension.
pub fn save_mesh(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshError> {
    mesh.validate()?;
    match extension(path)?.as_str() {
        "obj" => save_obj(mesh, path),
        "ply" => save_ply(mesh, path),
        other => Err(MeshError::UnsupportedFormat(other.to_string())),
    }
}

fn extension(path: &Path) -> Result<String, MeshError> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| MeshError::UnsupportedFormat(path.display().to_string()))
}

fn load_obj(path: &Path) -> Result<TriangleMesh, MeshError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in &mut coords {
                    let tok = tokens.next().ok_or_else(|| {
                        parse_err(path, format!("line {}: vertex needs 3 coordinates", lineno + 1))
                    })?;
                    *c = tok.parse::<f64>().map_err(|_| {
                        parse_err(path, format!("line {}: bad coordinate {tok:?}", lineno + 1))
                    })?;
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tokens
                    .map(|tok| {
                        // "i", "i/t", "i/t/n", "i//n" — the vertex index leads.
                        let head = tok.split('/').next().unwrap_or(tok);
                        let raw: i64 = head.parse().map_err(|_| {
                            parse_err(path, format!("line {}: bad face index {tok:?}", lineno + 1))
                        })?;
                        if raw == 0 {
                            return Err(parse_err(
                                path,
                                format!("line {}: face index 0 (OBJ indices are 1-based)", lineno + 1),
                            ));
                        }
                        let resolved = if raw > 0 {
                            (raw - 1) as usize
                        } else {
                            let from_end = vertices.len() as i64 + raw;
                            if from_end < 0 {
                                return Err(parse_err(
                                    path,
                                    format!("line {}: relative index out of range", lineno + 1),
                                ));
                            }
                            from_end as usize
                        };
                        Ok(resolved)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(
                        path,
                        format!("line {}: face needs at least 3 vertices", lineno + 1),
                    ));
                }
                // Fan-triangulate polygons.
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces, None)
}

fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for v in &mesh.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for f in &mesh.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        w.flush()
    };
    write().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyFormat {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyScalar {
    F32,
    F64,
    U8,
    I8,
    U16,
    I16,
    U32,
    I32,
}

impl PlyScalar {
    fn parse(name: &str) -> Option<PlyScalar> {
        Some(match name {
            "float" | "float32" => PlyScalar::F32,
            "double" | "float64" => PlyScalar::F64,
            "uchar" | "uint8" => PlyScalar::U8,
            "char" | "int8" => PlyScalar::I8,
            "ushort" | "uint16" => PlyScalar::U16,
            "short" | "int16" => PlyScalar::I16,
            "uint" | "uint32" => PlyScalar::U32,
            "int" | "int32" => PlyScalar::I32,
            _ => None,
        })
    }

    fn size(self) -> usize {
        match self {
            PlyScalar::U8 | PlyScalar::I8 => 1,
            PlyScalar::U16 | PlyScalar::I16 => 2,
            PlyScalar::U32 | PlyScalar::I32 | PlyScalar::F32 => 4,
            PlyScalar::F64 => 8,
        }
    }

    fn read_f64(self, bytes: &[u8]) -> f64 {
        match self {
            PlyScalar::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
            PlyScalar::U8 => bytes[0] as f64,
            PlyScalar::I8 => bytes[0] as i8 as f64,
            PlyScalar::U16 => u16::from_le_bytes(bytes[..2].try_into().unwrap()) as f64,
            PlyScalar::I16 => i16::from_le_bytes(bytes[..2].try_into().unwrap()) as f64,
            PlyScalar::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
        }
    }
}

struct PlyElement {
    name: String,
    count: usize,
    // (property name, scalar type, optional list-count type)
    properties: Vec<(String, PlyScalar, Option<PlyScalar>)>,
}

fn load_ply(path: &Path) -> Result<TriangleMesh, MeshError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);

    let mut line = String::new();
    let mut read_line = |reader: &mut BufReader<File>| -> Result<String, MeshError> {
        line.clear();
        reader.read_line(&mut line).map_err(|e| io_err(path, e))?;
        Ok(line.trim_end().to_string())
    };

    if read_line(&mut reader)? != "ply" {
        return Err(parse_err(path, "missing ply magic"));
    }
    let mut format = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let l = read_line(&mut reader)?;
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("format") => {
                format = match tok.next() {
                    Some("ascii") => Some(PlyFormat::Ascii),
                    Some("binary_little_endian") => Some(PlyFormat::BinaryLe),
                    other => {
                        return Err(parse_err(path, format!("unsupported format {other:?}")))
                    }
                };
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(path, "element without name"))?;
                let count: usize = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(path, "element without count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, "property before element"))?;
                let kind = tok
                    .next()
                    .ok_or_else(|| parse_err(path, "property without type"))?;
                if kind == "list" {
                    let count_ty = tok
                        .next()
                        .and_then(PlyScalar::parse)
                        .ok_or_else(|| parse_err(path, "bad list count type"))?;
                    let item_ty = tok
                        .next()
                        .and_then(PlyScalar::parse)
                        .ok_or_else(|| parse_err(path, "bad list item type"))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| parse_err(path, "list property without name"))?;
                    element
                        .properties
                        .push((name.to_string(), item_ty, Some(count_ty)));
                } else {
                    let ty = PlyScalar::parse(kind)
                        .ok_or_else(|| parse_err(path, format!("bad property type {kind:?}")))?;
                    let name = tok
                        .next()
                        .ok_or_else(|| parse_err(path, "property without name"))?;
                    element.properties.push((name.to_string(), ty, None));
                }
            }
            Some("end_header") => break,
            Some(other) => return Err(parse_err(path, format!("unexpected header line {other:?}"))),
            None => return Err(parse_err(path, "truncated header")),
        }
    }
    let format = format.ok_or_else(|| parse_err(path, "missing format line"))?;

    let mut vertices = Vec::new();
    let mut colors: Vec<[u8; 3]> = Vec::new();
    let mut has_color = false;
    let mut faces = Vec::new();

    match format {
        PlyFormat::Ascii => {
            let mut lines = reader.lines();
            let mut next_data_line = || -> Result<Vec<String>, MeshError> {
                loop {
                    let l = lines
                        .next()
                        .ok_or_else(|| parse_err(path, "unexpected end of data"))?
                        .map_err(|e| io_err(path, e))?;
                    let tokens: Vec<String> =
                        l.split_whitespace().map(|s| s.to_string()).collect();
                    if !tokens.is_empty() {
                        return Ok(tokens);
                    }
                }
            };
            for element in &elements {
                for _ in 0..element.count {
                    let tokens = next_data_line()?;
                    parse_ply_record_ascii(
                        path,
                        element,
                        &tokens,
                        &mut vertices,
                        &mut colors,
                        &mut has_color,
                        &mut faces,
                    )?;
                }
            }
        }
        PlyFormat::BinaryLe => {
            let mut data = Vec::new();
            reader.read_to_end(&mut data).map_err(|e| io_err(path, e))?;
            let mut offset = 0usize;
            for element in &elements {
                for _ in 0..element.count {
                    parse_ply_record_binary(
                        path,
                        element,
                        &data,
                        &mut offset,
                        &mut vertices,
                        &mut colors,
                        &mut has_color,
                        &mut faces,
                    )?;
                }
            }
        }
    }

    let colors = if has_color && colors.len() == vertices.len() {
        Some(colors)
    } else {
        None
    };
    TriangleMesh::new(vertices, faces, colors)
}

fn parse_ply_record_ascii(
    path: &Path,
    element: &PlyElement,
    tokens: &[String],
    vertices: &mut Vec<Point3>,
    colors: &mut Vec<[u8; 3]>,
    has_color: &mut bool,
    faces: &mut Vec<[usize; 3]>,
) -> Result<(), MeshError> {
    let mut cursor = 0usize;
    let mut take = |n: usize| -> Result<&[String], MeshError> {
        if cursor + n > tokens.len() {
            return Err(parse_err(path, "short data line"));
        }
        let s = &tokens[cursor..cursor + n];
        cursor += n;
        Ok(s)
    };

    if element.name == "vertex" {
        let mut pos = [f64::NAN; 3];
        let mut rgb = [0u8; 3];
        let mut saw_rgb = 0usize;
        for (name, _, list) in &element.properties {
            if list.is_some() {
                return Err(parse_err(path, "list property on vertex element"));
            }
            let tok = &take(1)?[0];
            let value: f64 = tok
                .parse()
                .map_err(|_| parse_err(path, format!("bad vertex value {tok:?}")))?;
            match name.as_str() {
                "x" => pos[0] = value,
                "y" => pos[1] = value,
                "z" => pos[2] = value,
                "red" => {
                    rgb[0] = value as u8;
                    saw_rgb += 1;
                }
                "green" => {
                    rgb[1] = value as u8;
                    saw_rgb += 1;
                }
                "blue" => {
                    rgb[2] = value as u8;
                    saw_rgb += 1;
                }
                _ => {}
            }
        }
        if pos.iter().any(|c| c.is_nan()) {
            return Err(parse_err(path, "vertex element lacks x/y/z"));
        }
        vertices.push(Point3::new(pos[0], pos[1], pos[2]));
        if saw_rgb == 3 {
            *has_color = true;
            colors.push(rgb);
        }
    } else if element.name == "face" {
        for (name, _, list) in &element.properties {
            let Some(_) = list else {
                let _ = take(1)?;
                continue;
            };
            let count: usize = take(1)?[0]
                .parse()
                .map_err(|_| parse_err(path, "bad list count"))?;
            let items = take(count)?;
            if name == "vertex_indices" || name == "vertex_index" {
                let idx: Vec<usize> = items
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| parse_err(path, "bad index")))
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(path, "face with fewer than 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
        }
    } else {
        // Skip unknown elements token-wise.
        for (_, _, list) in &element.properties {
            if list.is_some() {
                let count: usize = take(1)?[0]
                    .parse()
                    .map_err(|_| parse_err(path, "bad list count"))?;
                let _ = take(count)?;
            } else {
                let _ = take(1)?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn parse_ply_record_binary(
    path: &Path,
    element: &PlyElement,
    data: &[u8],
    offset: &mut usize,
    vertices: &mut Vec<Point3>,
    colors: &mut Vec<[u8; 3]>,
    has_color: &mut bool,
    faces: &mut Vec<[usize; 3]>,
) -> Result<(), MeshError> {
    let mut take = |n: usize| -> Result<&[u8], MeshError> {
        if *offset + n > data.len() {
            return Err(parse_err(path, "truncated binary data"));
        }
        let s = &data[*offset..*offset + n];
        *offset += n;
        Ok(s)
    };

    let mut pos = [f64::NAN; 3];
    let mut rgb = [0u8; 3];
    let mut saw_rgb = 0usize;
    for (name, ty, list) in &element.properties {
        if let Some(count_ty) = list {
            let count = count_ty.read_f64(take(count_ty.size())?) as usize;
            let mut idx = Vec::with_capacity(count);
            for _ in 0..count {
                let v = ty.read_f64(take(ty.size())?);
                if v < 0.0 {
                    return Err(parse_err(path, "negative face index"));
                }
                idx.push(v as usize);
            }
            if element.name == "face" && (name == "vertex_indices" || name == "vertex_index") {
                if idx.len() < 3 {
                    return Err(parse_err(path, "face with fewer than 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
        } else {
            let v = ty.read_f64(take(ty.size())?);
            if element.name == "vertex" {
                match name.as_str() {
                    "x" => pos[0] = v,
                    "y" => pos[1] = v,
                    "z" => pos[2] = v,
                    "red" => {
                        rgb[0] = v as u8;
                        saw_rgb += 1;
                    }
                    "green" => {
                        rgb[1] = v as u8;
                        saw_rgb += 1;
                    }
                    "blue" => {
                        rgb[2] = v as u8;
                        saw_rgb += 1;
                    }
                    _ => {}
                }
            }
        }
    }
    if element.name == "vertex" {
        if pos.iter().any(|c| c.is_nan()) {
            return Err(parse_err(path, "vertex element lacks x/y/z"));
        }
        vertices.push(Point3::new(pos[0], pos[1], pos[2]));
        if saw_rgb == 3 {
            *has_color = true;
            colors.push(rgb);
        }
    }
    Ok(())
}

fn save_ply(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "ply")?;
        writeln!(w, "format binary_little_endian 1.0")?;
        writeln!(w, "element vertex {}", mesh.vertices.len())?;
        writeln!(w, "property double x")?;
        writeln!(w, "property double y")?;
        writeln!(w, "property double z")?;
        if mesh.colors.is_some() {
            writeln!(w, "property uchar red")?;
            writeln!(w, "property uchar green")?;
            writeln!(w, "property uchar blue")?;
        }
        writeln!(w, "element face {}", mesh.faces.len())?;
        writeln!(w, "property list uchar int vertex_indices")?;
        writeln!(w, "end_header")?;
        for (i, v) in mesh.vertices.iter().enumerate() {
            w.write_all(&v.x.to_le_bytes())?;
            w.write_all(&v.y.to_le_bytes())?;
            w.write_all(&v.z.to_le_bytes())?;
            if let Some(colors) = &mesh.colors {
                w.write_all(&colors[i])?;
            }
        }
        for f in &mesh.faces {
            w.write_all(&[3u8])?;
            for &idx in f {
                w.write_all(&(idx as i32).to_le_bytes())?;
            }
        }
        w.flush()
    };
    write().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn obj_minimal_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.face_count(), 1);
    }

    #[test]
    fn obj_zero_index_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap();
        assert!(matches!(load_mesh(&path), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn obj_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.obj");
        let mesh = primitives::cube(1.5);
        save_mesh(&mesh, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.faces, mesh.faces);
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn ply_binary_round_trip_with_colors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.ply");
        let mut mesh = primitives::cube(2.0);
        mesh.colors = Some((0..8).map(|i| [i as u8 * 30, 10, 255 - i as u8]).collect());
        save_mesh(&mesh, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.faces, mesh.faces);
        assert_eq!(back.colors, mesh.colors);
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ply_ascii_reader() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.ply");
        let text = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255 0 0\n1 0 0 0 255 0\n0 1 0 0 0 255\n3 0 1 2\n";
        std::fs::write(&path, text).unwrap();
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
        assert_eq!(mesh.colors.as_ref().unwrap()[0], [255, 0, 0]);
    }

    #[test]
    fn unwritable_path_errors() {
        let mesh = primitives::cube(1.0);
        let err = save_mesh(&mesh, Path::new("/nonexistent-dir/cube.ply"));
        assert!(matches!(err, Err(MeshError::Io { .. })));
    }

    #[test]
    fn out_of_range_face_index_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oob.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").unwrap();
        assert!(matches!(
            load_mesh(&path),
            Err(MeshError::FaceIndexOutOfRange { .. })
        ));
    }
}
