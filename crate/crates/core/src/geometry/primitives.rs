//! Small closed meshes used as targets, discriminator data and test fixtures.

use super::{icosphere, Mesh, Vec3};

/// Axis-aligned cube of edge length `side` centred at the origin.
pub fn cube(side: f64) -> Mesh {
    let h = side / 2.0;
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h } else { h },
                if i & 2 == 0 { -h } else { h },
                if i & 4 == 0 { -h } else { h },
            )
        })
        .collect();
    let faces = vec![
        [0, 4, 6],
        [0, 6, 2],
        [1, 3, 7],
        [1, 7, 5],
        [0, 1, 5],
        [0, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        [0, 2, 3],
        [0, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
    ];
    Mesh { vertices, faces }
}

/// Axis-aligned box with the given half extents.
pub fn cuboid(half_extents: Vec3) -> Mesh {
    cube(2.0).scaled(half_extents)
}

/// Ellipsoid from a subdivided icosphere.
pub fn ellipsoid(radii: Vec3, subdivisions: u32) -> Mesh {
    icosphere(subdivisions.min(super::MAX_SUBDIVISIONS))
        .expect("subdivisions clamped to the supported range")
        .scaled(radii)
}

/// Regular tetrahedron inscribed in the cube `[-s, s]^3`.
pub fn tetrahedron(s: f64) -> Mesh {
    Mesh {
        vertices: vec![
            Vec3::new(s, s, s),
            Vec3::new(s, -s, -s),
            Vec3::new(-s, s, -s),
            Vec3::new(-s, -s, s),
        ],
        faces: vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    }
}

pub fn triangle(a: Vec3, b: Vec3, c: Vec3) -> Mesh {
    Mesh {
        vertices: vec![a, b, c],
        faces: vec![[0, 1, 2]],
    }
}

/// Flat `n x n` quad grid over `[-1, 1]^2` in the `z = 0` plane, facing `+z`.
pub fn grid(n: usize) -> Mesh {
    let n = n.max(1);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(
                -1.0 + 2.0 * i as f64 / n as f64,
                -1.0 + 2.0 * j as f64 / n as f64,
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh { vertices, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::adjacency;

    #[test]
    fn closed_primitives_are_outward_and_closed() {
        for mesh in [
            cube(1.0),
            tetrahedron(1.0),
            cuboid(Vec3::new(0.2, 0.5, 0.3)),
        ] {
            assert!(adjacency(&mesh).unwrap().is_closed());
            assert!(mesh.signed_volume() > 0.0);
        }
        let tet = tetrahedron(1.0);
        assert!((tet.signed_volume() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_counts() {
        let g = grid(3);
        assert_eq!(g.vertices.len(), 16);
        assert_eq!(g.faces.len(), 18);
        assert!(g
            .faces
            .iter()
            .enumerate()
            .all(|(i, _)| g.face_cross(i).z > 0.0));
    }
}
