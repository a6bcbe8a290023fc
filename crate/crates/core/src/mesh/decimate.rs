//! Quadric-error-metric edge-collapse decimation.
//!
//! Plane-based quadrics accumulated per vertex (area-weighted, plus
//! perpendicular constraint planes on boundary edges), candidate collapses
//! kept in a priority queue by cost with lazy invalidation, and collapse
//! placement at the quadric-optimal point with a midpoint fallback when
//! the quadric is singular. Non-manifold edges and collapses that would
//! flip a face normal are ineligible rather than fatal.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::{MeshError, TriangleMesh, VertexMap};
use crate::Point3;

/// Decimate `mesh` to at most `max_vertices` vertices.
///
/// Returns the decimated mesh and a total map from original vertex
/// indices to surviving vertex indices. A mesh already at or below the
/// target is returned unchanged with the identity map.
pub fn decimate(
    mesh: &TriangleMesh,
    max_vertices: usize,
) -> Result<(TriangleMesh, VertexMap), MeshError> {
    if max_vertices < 4 {
        return Err(MeshError::TargetTooSmall(max_vertices));
    }
    mesh.validate()?;
    if mesh.vertex_count() <= max_vertices {
        return Ok((mesh.clone(), VertexMap::identity(mesh.vertex_count())));
    }
    Decimator::new(mesh).run(max_vertices)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    u: usize,
    v: usize,
    stamp_u: u64,
    stamp_v: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Min-heap by cost; ties broken by indices for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.u.cmp(&self.u))
            .then_with(|| other.v.cmp(&self.v))
    }
}

struct Decimator {
    positions: Vec<Point3>,
    colors: Option<Vec<[u8; 3]>>,
    quadrics: Vec<Matrix4<f64>>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_alive: Vec<bool>,
    stamps: Vec<u64>,
    parent: Vec<usize>,
    alive_count: usize,
    face_alive_count: usize,
}

impl Decimator {
    fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.vertex_count();
        let mut quadrics = vec![Matrix4::zeros(); n];
        for f in 0..mesh.face_count() {
            let [a, b, c] = mesh.faces[f];
            let pa = mesh.vertices[a];
            let normal = (mesh.vertices[b] - pa).cross(&(mesh.vertices[c] - pa));
            let area2 = normal.norm();
            if area2 <= 1e-12 {
                continue;
            }
            let unit = normal / area2;
            let d = -unit.dot(&pa.coords);
            let plane = Vector4::new(unit.x, unit.y, unit.z, d);
            let q = plane * plane.transpose() * (0.5 * area2);
            quadrics[a] += q;
            quadrics[b] += q;
            quadrics[c] += q;
        }

        // Boundary constraint planes: perpendicular to the adjacent face,
        // weighted by squared edge length.
        let mut edge_faces: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        for (f, &[a, b, c]) in mesh.faces.iter().enumerate() {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                edge_faces.entry((u.min(v), u.max(v))).or_default().push(f);
            }
        }
        for (&(u, v), fs) in &edge_faces {
            if fs.len() != 1 {
                continue;
            }
            let fnormal = mesh.face_normal(fs[0]);
            let edge = mesh.vertices[v] - mesh.vertices[u];
            let len = edge.norm();
            if len <= 1e-12 {
                continue;
            }
            let wall = edge.cross(&fnormal);
            let wn = wall.norm();
            if wn <= 1e-12 {
                continue;
            }
            let unit = wall / wn;
            let d = -unit.dot(&mesh.vertices[u].coords);
            let plane = Vector4::new(unit.x, unit.y, unit.z, d);
            let q = plane * plane.transpose() * (len * len);
            quadrics[u] += q;
            quadrics[v] += q;
        }

        let mut vertex_faces = vec![Vec::new(); n];
        for (f, &[a, b, c]) in mesh.faces.iter().enumerate() {
            vertex_faces[a].push(f);
            vertex_faces[b].push(f);
            vertex_faces[c].push(f);
        }

        Decimator {
            positions: mesh.vertices.clone(),
            colors: mesh.colors.clone(),
            quadrics,
            faces: mesh.faces.clone(),
            face_alive: vec![true; mesh.face_count()],
            vertex_faces,
            vertex_alive: vec![true; n],
            stamps: vec![0; n],
            parent: (0..n).collect(),
            alive_count: n,
            face_alive_count: mesh.face_count(),
        }
    }

    fn find_root(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &f in &self.vertex_faces[u] {
            if !self.face_alive[f] {
                continue;
            }
            for &w in &self.faces[f] {
                if w != u {
                    out.push(w);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn edge_face_count(&self, u: usize, v: usize) -> usize {
        self.vertex_faces[u]
            .iter()
            .filter(|&&f| self.face_alive[f] && self.faces[f].contains(&v))
            .count()
    }

    /// Optimal placement and cost for collapsing (u, v).
    fn placement(&self, u: usize, v: usize) -> (Point3, f64) {
        let q = self.quadrics[u] + self.quadrics[v];
        let a = Matrix3::new(
            q[(0, 0)],
            q[(0, 1)],
            q[(0, 2)],
            q[(1, 0)],
            q[(1, 1)],
            q[(1, 2)],
            q[(2, 0)],
            q[(2, 1)],
            q[(2, 2)],
        );
        let b = Vector3::new(q[(0, 3)], q[(1, 3)], q[(2, 3)]);
        let midpoint = Point3::from((self.positions[u].coords + self.positions[v].coords) * 0.5);
        let target = match a.try_inverse() {
            Some(inv) if a.determinant().abs() > 1e-10 * a.norm().powi(3).max(1e-300) => {
                Point3::from(inv * (-b))
            }
            _ => midpoint,
        };
        let eval = |p: Point3| {
            let h = Vector4::new(p.x, p.y, p.z, 1.0);
            (h.transpose() * q * h)[(0, 0)]
        };
        let cost_target = eval(target);
        let cost_mid = eval(midpoint);
        // Guard against ill-conditioned inversions placing the vertex far away.
        if cost_target.is_finite() && cost_target <= cost_mid {
            (target, cost_target.max(0.0))
        } else {
            (midpoint, cost_mid.max(0.0))
        }
    }

    fn push_candidates_for(&mut self, u: usize, heap: &mut BinaryHeap<Candidate>) {
        for v in self.neighbors(u) {
            let (a, b) = (u.min(v), u.max(v));
            let (_, cost) = self.placement(a, b);
            heap.push(Candidate {
                cost,
                u: a,
                v: b,
                stamp_u: self.stamps[a],
                stamp_v: self.stamps[b],
            });
        }
    }

    fn collapse_valid(&self, u: usize, v: usize, placement: Point3) -> bool {
        // Non-manifold edges are ineligible.
        let shared_faces = self.edge_face_count(u, v);
        if shared_faces == 0 || shared_faces > 2 {
            return false;
        }
        // Link condition: common neighbors must be exactly the apexes of
        // the shared faces, otherwise the collapse pinches the surface.
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let common = nu.iter().filter(|w| nv.binary_search(w).is_ok()).count();
        if common != shared_faces {
            return false;
        }
        // Reject collapses that flip a surviving face.
        for &(x, other) in &[(u, v), (v, u)] {
            for &f in &self.vertex_faces[x] {
                if !self.face_alive[f] || self.faces[f].contains(&other) {
                    continue;
                }
                let [a, b, c] = self.faces[f];
                let p = |w: usize| {
                    if w == x {
                        placement
                    } else {
                        self.positions[w]
                    }
                };
                let old = (self.positions[b] - self.positions[a])
                    .cross(&(self.positions[c] - self.positions[a]));
                let new = (p(b) - p(a)).cross(&(p(c) - p(a)));
                if old.norm() > 1e-12 && new.dot(&old) <= 1e-12 * old.norm() * new.norm().max(1e-30)
                    || new.norm() <= 1e-14
                {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, u: usize, v: usize, placement: Point3) {
        // v merges into u; u moves to the placement point.
        self.positions[u] = placement;
        self.quadrics[u] += self.quadrics[v];
        self.parent[v] = u;
        self.vertex_alive[v] = false;
        self.alive_count -= 1;

        let v_faces = std::mem::take(&mut self.vertex_faces[v]);
        for f in v_faces {
            if !self.face_alive[f] {
                continue;
            }
            if self.faces[f].contains(&u) {
                // Face spanned the collapsed edge: it disappears.
                self.face_alive[f] = false;
                self.face_alive_count -= 1;
            } else {
                for w in self.faces[f].iter_mut() {
                    if *w == v {
                        *w = u;
                    }
                }
                self.vertex_faces[u].push(f);
            }
        }
        self.vertex_faces[u].retain(|&f| self.face_alive[f]);
        self.vertex_faces[u].sort_unstable();
        self.vertex_faces[u].dedup();

        self.stamps[u] += 1;
        let nbrs = self.neighbors(u);
        for w in nbrs {
            self.stamps[w] += 1;
        }
    }

    fn run(mut self, max_vertices: usize) -> Result<(TriangleMesh, VertexMap), MeshError> {
        let mut heap = BinaryHeap::new();
        let mut seen = std::collections::HashSet::new();
        for f in 0..self.faces.len() {
            let [a, b, c] = self.faces[f];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = (u.min(v), u.max(v));
                if seen.insert(key) {
                    let (_, cost) = self.placement(key.0, key.1);
                    heap.push(Candidate {
                        cost,
                        u: key.0,
                        v: key.1,
                        stamp_u: 0,
                        stamp_v: 0,
                    });
                }
            }
        }
        drop(seen);

        while self.alive_count > max_vertices {
            let Some(cand) = heap.pop() else {
                return Err(MeshError::DecimationStalled {
                    achieved: self.alive_count,
                    target: max_vertices,
                });
            };
            if !self.vertex_alive[cand.u]
                || !self.vertex_alive[cand.v]
                || self.stamps[cand.u] != cand.stamp_u
                || self.stamps[cand.v] != cand.stamp_v
            {
                continue;
            }
            if self.face_alive_count <= 2 {
                return Err(MeshError::DecimationStalled {
                    achieved: self.alive_count,
                    target: max_vertices,
                });
            }
            let (placement, _) = self.placement(cand.u, cand.v);
            if !self.collapse_valid(cand.u, cand.v, placement) {
                continue;
            }
            self.collapse(cand.u, cand.v, placement);
            self.push_candidates_for(cand.u, &mut heap);
        }

        // Compact surviving vertices and faces.
        let n = self.positions.len();
        let mut new_index = vec![usize::MAX; n];
        let mut vertices = Vec::with_capacity(self.alive_count);
        let mut colors = self.colors.as_ref().map(|_| Vec::with_capacity(self.alive_count));
        for i in 0..n {
            if self.vertex_alive[i] {
                new_index[i] = vertices.len();
                vertices.push(self.positions[i]);
                if let (Some(out), Some(src)) = (&mut colors, &self.colors) {
                    out.push(src[i]);
                }
            }
        }
        let mut faces = Vec::with_capacity(self.face_alive_count);
        for f in 0..self.faces.len() {
            if !self.face_alive[f] {
                continue;
            }
            let [a, b, c] = self.faces[f];
            let tri = [new_index[a], new_index[b], new_index[c]];
            if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                faces.push(tri);
            }
        }
        let mut map = vec![0usize; n];
        for i in 0..n {
            let root = self.find_root(i);
            map[i] = new_index[root];
        }
        let mesh = TriangleMesh::new(vertices, faces, colors)?;
        Ok((mesh, VertexMap::from_vec(map)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom;
    use crate::mesh::{mesh_quality, primitives};

    #[test]
    fn already_under_target_is_identity() {
        let mesh = primitives::icosphere(1, 10.0);
        let (out, map) = decimate(&mesh, 200).unwrap();
        assert_eq!(out, mesh);
        assert_eq!(map, VertexMap::identity(mesh.vertex_count()));
    }

    #[test]
    fn target_below_minimum_rejected() {
        let mesh = primitives::cube(1.0);
        assert!(matches!(decimate(&mesh, 3), Err(MeshError::TargetTooSmall(3))));
    }

    #[test]
    fn sphere_decimation_respects_target_and_map_is_total() {
        let mesh = primitives::icosphere(3, 50.0);
        let (out, map) = decimate(&mesh, 160).unwrap();
        assert!(out.vertex_count() <= 160);
        assert!(out.validate().is_ok());
        assert_eq!(map.len(), mesh.vertex_count());
        assert!(map.is_total_into(out.vertex_count()));
        // Still closed and connected.
        let q = mesh_quality(&out);
        assert_eq!(q.boundary_loop_count, 0);
        assert_eq!(q.connected_component_count, 1);
    }

    #[test]
    fn sphere_decimation_hausdorff_within_two_percent() {
        let mesh = primitives::icosphere(5, 50.0);
        assert_eq!(mesh.vertex_count(), 10242);
        let (out, _) = decimate(&mesh, 2500).unwrap();
        assert!(out.vertex_count() <= 2500);
        let (lo, hi) = mesh.bounding_box();
        let diag = (hi - lo).norm();

        // Symmetric Hausdorff estimate over vertex + centroid samples,
        // brute-force point-to-triangle distance.
        let sample = |m: &TriangleMesh| -> Vec<Point3> {
            let mut pts = m.vertices.clone();
            pts.extend(m.faces.iter().map(|&[a, b, c]| {
                Point3::from((m.vertices[a].coords + m.vertices[b].coords + m.vertices[c].coords) / 3.0)
            }));
            pts
        };
        let dist = |pts: &[Point3], m: &TriangleMesh| -> f64 {
            pts.iter()
                .map(|p| {
                    m.faces
                        .iter()
                        .map(|&[a, b, c]| {
                            geom::point_triangle_distance(
                                *p,
                                m.vertices[a],
                                m.vertices[b],
                                m.vertices[c],
                            )
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0_f64, f64::max)
        };
        let h = dist(&sample(&mesh), &out).max(dist(&sample(&out), &mesh));
        assert!(
            h <= 0.02 * diag,
            "Hausdorff {h:.3} exceeds 2% of diagonal {diag:.3}"
        );
    }

    #[test]
    fn cube_to_four_vertices_or_reported_stall() {
        let mesh = primitives::cube(1.0);
        match decimate(&mesh, 4) {
            Ok((out, map)) => {
                assert!(out.vertex_count() <= 4);
                assert!(out.validate().is_ok());
                assert!(map.is_total_into(out.vertex_count()));
                // Closed and orientable: every edge appears in exactly two
                // faces, once per direction.
                let mut directed = std::collections::HashMap::new();
                for &[a, b, c] in &out.faces {
                    for (u, v) in [(a, b), (b, c), (c, a)] {
                        *directed.entry((u, v)).or_insert(0) += 1;
                    }
                }
                for (&(u, v), &count) in &directed {
                    assert_eq!(count, 1);
                    assert_eq!(directed.get(&(v, u)), Some(&1));
                }
            }
            Err(MeshError::DecimationStalled { achieved, target }) => {
                assert!(achieved > target);
            }
            Err(other) => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn decimation_never_references_removed_vertices() {
        let mesh = primitives::icosphere(2, 20.0);
        let (out, _) = decimate(&mesh, 60).unwrap();
        for f in &out.faces {
            for &i in f {
                assert!(i < out.vertex_count());
            }
        }
    }
}
