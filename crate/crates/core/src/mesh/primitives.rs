//! Small parametric meshes used as fixtures and templates.

use crate::{Point3, TriangleMesh, Vec3};

/// Axis-aligned cube with 8 vertices and 12 faces, outward winding.
pub fn cube(half_extent: f64) -> TriangleMesh {
    let h = half_extent;
    let vertices = vec![
        Point3::new(-h, -h, -h),
        Point3::new(h, -h, -h),
        Point3::new(h, h, -h),
        Point3::new(-h, h, -h),
        Point3::new(-h, -h, h),
        Point3::new(h, -h, h),
        Point3::new(h, h, h),
        Point3::new(-h, h, h),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh {
        vertices,
        faces,
        colors: None,
    }
}

/// Icosphere with `subdivisions` rounds of loop splitting.
///
/// Vertex count is `10 * 4^s + 2`: 12, 42, 162, 642, 2562, 10242, ...
pub fn icosphere(subdivisions: u32, radius: f64) -> TriangleMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint = std::collections::HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |u: usize, v: usize, vertices: &mut Vec<Vec3>| -> usize {
                let key = (u.min(v), u.max(v));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[u] + vertices[v]).normalize();
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    TriangleMesh {
        vertices: vertices
            .into_iter()
            .map(|v| Point3::from(v * radius))
            .collect(),
        faces,
        colors: None,
    }
}

/// Flat rectangular grid in the XY plane, `nx` x `ny` vertices.
pub fn grid(nx: usize, ny: usize, width: f64, height: f64) -> TriangleMesh {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = width * (i as f64 / (nx - 1) as f64 - 0.5);
            let y = height * (j as f64 / (ny - 1) as f64 - 0.5);
            vertices.push(Point3::new(x, y, 0.0));
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            // Alternate the diagonal for isotropy.
            if (i + j) % 2 == 0 {
                faces.push([v00, v10, v11]);
                faces.push([v00, v11, v01]);
            } else {
                faces.push([v00, v10, v01]);
                faces.push([v10, v11, v01]);
            }
        }
    }
    TriangleMesh {
        vertices,
        faces,
        colors: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn icosphere_counts_and_radius() {
        let m = icosphere(2, 3.0);
        assert_eq!(m.vertex_count(), 162);
        assert_eq!(m.face_count(), 320);
        for v in &m.vertices {
            assert_relative_eq!(v.coords.norm(), 3.0, max_relative = 1e-12);
        }
        assert!(m.validate().is_ok());
    }

    #[test]
    fn cube_volume() {
        let m = cube(1.0);
        assert_relative_eq!(m.signed_volume(), 8.0, max_relative = 1e-12);
    }

    #[test]
    fn grid_is_flat_open_patch() {
        let m = grid(5, 4, 10.0, 6.0);
        assert_eq!(m.vertex_count(), 20);
        assert!(m.validate().is_ok());
        let q = crate::mesh::mesh_quality(&m);
        assert_eq!(q.boundary_loop_count, 1);
        assert_eq!(q.connected_component_count, 1);
    }
}
