//! Triangle mesh representation, I/O, decimation and quality checks.
//!
//! Coordinates are millimeters. Faces are counter-clockwise when viewed
//! from outside, so the right-hand rule gives outward normals. Optional
//! per-vertex colors are carried through I/O but never used by any
//! numerical stage.

mod decimate;
mod io;
pub mod primitives;

pub use decimate::decimate;
pub use io::{load_mesh, save_mesh};

use std::collections::HashMap;

use thiserror::Error;

use crate::landmarks::LandmarkSet;
use crate::{Point3, Vec3};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh has no vertices")]
    Empty,
    #[error("face {face} references vertex {index} but mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {0} is degenerate (repeated vertex index)")]
    DegenerateFace(usize),
    #[error("vertex {0} has non-finite coordinates")]
    NonFiniteVertex(usize),
    #[error("color array length {colors} does not match vertex count {vertices}")]
    ColorLengthMismatch { colors: usize, vertices: usize },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("unsupported mesh format {0:?} (expected .obj or .ply)")]
    UnsupportedFormat(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("decimation stopped at {achieved} vertices, above the target {target}")]
    DecimationStalled { achieved: usize, target: usize },
    #[error("decimation target {0} is below the minimum of 4 vertices")]
    TargetTooSmall(usize),
}

/// Indexed triangle surface.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    /// Optional per-vertex RGB, informational only.
    pub colors: Option<Vec<[u8; 3]>>,
}

impl TriangleMesh {
    /// Build a mesh, checking the structural invariants.
    pub fn new(
        vertices: Vec<Point3>,
        faces: Vec<[usize; 3]>,
        colors: Option<Vec<[u8; 3]>>,
    ) -> Result<Self, MeshError> {
        let mesh = TriangleMesh {
            vertices,
            faces,
            colors,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Check all structural invariants: non-empty, finite coordinates,
    /// in-range and non-degenerate face indices, matching color length.
    pub fn validate(&self) -> Result<(), MeshError> {
        if self.vertices.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.coords.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteVertex(i));
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            for &idx in face {
                if idx >= self.vertices.len() {
                    return Err(MeshError::FaceIndexOutOfRange {
                        face: f,
                        index: idx,
                        vertex_count: self.vertices.len(),
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(MeshError::DegenerateFace(f));
            }
        }
        if let Some(colors) = &self.colors {
            if colors.len() != self.vertices.len() {
                return Err(MeshError::ColorLengthMismatch {
                    colors: colors.len(),
                    vertices: self.vertices.len(),
                });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_points(&self, f: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_points(f);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_points(f);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed volume by the divergence theorem; meaningful for closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (
                    self.vertices[a].coords,
                    self.vertices[b].coords,
                    self.vertices[c].coords,
                );
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Area-weighted vertex normals (unit length where defined).
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); self.vertices.len()];
        for &[a, b, c] in &self.faces {
            let n = (self.vertices[b] - self.vertices[a])
                .cross(&(self.vertices[c] - self.vertices[a]));
            normals[a] += n;
            normals[b] += n;
            normals[c] += n;
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Vertex adjacency lists (sorted, deduplicated).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertices.len()];
        for &[a, b, c] in &self.faces {
            nbrs[a].push(b);
            nbrs[a].push(c);
            nbrs[b].push(a);
            nbrs[b].push(c);
            nbrs[c].push(a);
            nbrs[c].push(b);
        }
        for n in &mut nbrs {
            n.sort_unstable();
            n.dedup();
        }
        nbrs
    }

    /// Indices of vertices on at least one boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for ((a, b), count) in edge_face_counts(&self.faces) {
            if count == 1 {
                flags[a] = true;
                flags[b] = true;
            }
        }
        flags
    }

    /// Apply a point transform to every vertex.
    pub fn map_points(&self, mut f: impl FnMut(Point3) -> Point3) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
            colors: self.colors.clone(),
        }
    }
}

/// Maps each original vertex index to its surviving vertex after decimation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    map: Vec<usize>,
}

impl VertexMap {
    pub fn identity(n: usize) -> Self {
        VertexMap {
            map: (0..n).collect(),
        }
    }

    pub(crate) fn from_vec(map: Vec<usize>) -> Self {
        VertexMap { map }
    }

    pub fn get(&self, original: usize) -> usize {
        self.map[original]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// True when every original vertex maps to a valid index below `n`.
    pub fn is_total_into(&self, n: usize) -> bool {
        self.map.iter().all(|&i| i < n)
    }
}

/// Mirror a mesh and its landmarks over the YZ plane.
///
/// X-coordinates are negated, face winding is flipped so normals stay
/// outward, and R/L landmark names are swapped.
pub fn mirror_yz(mesh: &TriangleMesh, landmarks: &LandmarkSet) -> (TriangleMesh, LandmarkSet) {
    let vertices = mesh
        .vertices
        .iter()
        .map(|p| Point3::new(-p.x, p.y, p.z))
        .collect();
    let faces = mesh.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
    let mirrored = TriangleMesh {
        vertices,
        faces,
        colors: mesh.colors.clone(),
    };
    (mirrored, landmarks.mirrored_yz())
}

/// Raw quality measurements used to detect scans with large gaps or
/// off-face clutter. Thresholds are left to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub boundary_loop_count: usize,
    /// Total edge length of the longest boundary loop, mm.
    pub longest_boundary_length: f64,
    pub connected_component_count: usize,
}

fn edge_face_counts(faces: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::with_capacity(faces.len() * 3 / 2);
    for &[a, b, c] in faces {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let key = (u.min(v), u.max(v));
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Boundary loop count, longest boundary length, and connected components.
pub fn mesh_quality(mesh: &TriangleMesh) -> QualityReport {
    let counts = edge_face_counts(&mesh.faces);

    // Directed boundary edges: for an edge used by exactly one face, keep
    // the direction it appears with in that face, so loops can be walked.
    let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
    for &[a, b, c] in &mesh.faces {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let key = (u.min(v), u.max(v));
            if counts[&key] == 1 {
                next.entry(u).or_default().push(v);
            }
        }
    }

    let mut boundary_loop_count = 0;
    let mut longest = 0.0_f64;
    let mut visited: HashMap<(usize, usize), bool> = HashMap::new();
    let starts: Vec<usize> = {
        let mut s: Vec<usize> = next.keys().copied().collect();
        s.sort_unstable();
        s
    };
    for start in starts {
        let targets = next[&start].clone();
        for first in targets {
            if *visited.get(&(start, first)).unwrap_or(&false) {
                continue;
            }
            // Walk the loop.
            let mut length = 0.0;
            let mut prev = start;
            let mut cur = first;
            visited.insert((start, first), true);
            length += (mesh.vertices[start] - mesh.vertices[first]).norm();
            let mut steps = 0usize;
            while cur != start {
                let Some(outs) = next.get(&cur) else { break };
                let mut advanced = false;
                for &n in outs {
                    if !*visited.get(&(cur, n)).unwrap_or(&false) {
                        visited.insert((cur, n), true);
                        length += (mesh.vertices[cur] - mesh.vertices[n]).norm();
                        prev = cur;
                        cur = n;
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
                steps += 1;
                if steps > mesh.faces.len() * 3 + 1 {
                    break;
                }
            }
            let _ = prev;
            boundary_loop_count += 1;
            longest = longest.max(length);
        }
    }

    // Connected components over the vertex graph; isolated vertices count.
    let mut parent: Vec<usize> = (0..mesh.vertices.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &[a, b, c] in &mesh.faces {
        for (u, v) in [(a, b), (b, c)] {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
            }
        }
        let (ra, rc) = (find(&mut parent, a), find(&mut parent, c));
        if ra != rc {
            parent[ra] = rc;
        }
    }
    let mut roots: Vec<usize> = (0..mesh.vertices.len())
        .map(|v| find(&mut parent, v))
        .collect();
    roots.sort_unstable();
    roots.dedup();

    QualityReport {
        boundary_loop_count,
        longest_boundary_length: longest,
        connected_component_count: roots.len(),
    }
}

/// Connected component label per vertex (labels are 0-based, dense).
pub fn vertex_components(mesh: &TriangleMesh) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..mesh.vertices.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &[a, b, c] in &mesh.faces {
        for (u, v) in [(a, b), (b, c)] {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
            }
        }
    }
    let mut label = vec![usize::MAX; mesh.vertices.len()];
    let mut count = 0;
    for v in 0..mesh.vertices.len() {
        let r = find(&mut parent, v);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        label[v] = label[r];
    }
    (label, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::LandmarkName;
    use approx::assert_relative_eq;

    #[test]
    fn validate_catches_bad_faces() {
        let verts = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriangleMesh::new(verts.clone(), vec![[0, 1, 2]], None).is_ok());
        assert!(matches!(
            TriangleMesh::new(verts.clone(), vec![[0, 1, 3]], None),
            Err(MeshError::FaceIndexOutOfRange { .. })
        ));
        assert!(matches!(
            TriangleMesh::new(verts, vec![[0, 1, 1]], None),
            Err(MeshError::DegenerateFace(0))
        ));
    }

    #[test]
    fn quality_closed_icosphere() {
        let mesh = primitives::icosphere(2, 10.0);
        let q = mesh_quality(&mesh);
        assert_eq!(q.boundary_loop_count, 0);
        assert_eq!(q.connected_component_count, 1);
        assert_eq!(q.longest_boundary_length, 0.0);
    }

    #[test]
    fn quality_one_face_removed_gives_one_loop() {
        let mut mesh = primitives::icosphere(2, 10.0);
        let removed = mesh.faces.pop().unwrap();
        let q = mesh_quality(&mesh);
        assert_eq!(q.boundary_loop_count, 1);
        assert_eq!(q.connected_component_count, 1);
        let expected: f64 = [(0, 1), (1, 2), (2, 0)]
            .iter()
            .map(|&(i, j)| (mesh.vertices[removed[i]] - mesh.vertices[removed[j]]).norm())
            .sum();
        assert_relative_eq!(q.longest_boundary_length, expected, max_relative = 1e-12);
    }

    #[test]
    fn quality_two_spheres_two_components() {
        let a = primitives::icosphere(1, 5.0);
        let mut b = primitives::icosphere(1, 5.0);
        let offset = Vec3::new(100.0, 0.0, 0.0);
        b.vertices.iter_mut().for_each(|p| *p += offset);
        let n = a.vertices.len();
        let mut vertices = a.vertices.clone();
        vertices.extend_from_slice(&b.vertices);
        let mut faces = a.faces.clone();
        faces.extend(b.faces.iter().map(|&[x, y, z]| [x + n, y + n, z + n]));
        let mesh = TriangleMesh::new(vertices, faces, None).unwrap();
        assert_eq!(mesh_quality(&mesh).connected_component_count, 2);
    }

    #[test]
    fn mirror_twice_is_identity() {
        let mesh = primitives::icosphere(1, 8.0);
        let mut lm = LandmarkSet::new();
        lm.insert(LandmarkName::ExocanthionR, Point3::new(30.0, 1.0, 2.0))
            .unwrap();
        lm.insert(LandmarkName::Nasion, Point3::new(0.0, 10.0, 5.0))
            .unwrap();
        let (m1, l1) = mirror_yz(&mesh, &lm);
        let (m2, l2) = mirror_yz(&m1, &l1);
        assert_eq!(l2, lm);
        for (a, b) in mesh.vertices.iter().zip(&m2.vertices) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        assert_eq!(mesh.faces, m2.faces);
    }

    #[test]
    fn mirror_negates_signed_volume_without_winding_flip() {
        let mesh = primitives::icosphere(2, 7.0);
        let v0 = mesh.signed_volume();
        let (mirrored, _) = mirror_yz(&mesh, &LandmarkSet::new());
        // Winding flip restores the sign, so |volume| is preserved.
        assert_relative_eq!(mirrored.signed_volume(), v0, max_relative = 1e-9);
        // Without the flip the reflection negates the volume.
        let unflipped = TriangleMesh {
            vertices: mirrored.vertices.clone(),
            faces: mesh.faces.clone(),
            colors: None,
        };
        assert_relative_eq!(unflipped.signed_volume(), -v0, max_relative = 1e-9);
    }
}
