use nalgebra::Vector3;

use crate::error::{ensure, Error, Result};

use super::SymmetryPlane;

pub type Vec3 = Vector3<f64>;

/// Triangle mesh with counter-clockwise (outward) winding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Builds a mesh and checks the index invariants.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Mesh { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty() -> Self {
        Mesh::default()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            ensure!(
                f.iter().all(|&i| i < n),
                Validation,
                "face {fi} references a vertex outside 0..{n}: {f:?}"
            );
            ensure!(
                f[0] != f[1] && f[1] != f[2] && f[0] != f[2],
                Validation,
                "face {fi} repeats a vertex index: {f:?}"
            );
        }
        for (vi, v) in self.vertices.iter().enumerate() {
            ensure!(
                v.iter().all(|c| c.is_finite()),
                Validation,
                "vertex {vi} is not finite: {v:?}"
            );
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Axis-aligned bounds, `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))),
        )
    }

    /// Mirror image through `plane`. Winding is reversed so normals stay outward.
    pub fn reflected(&self, plane: &SymmetryPlane) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| plane.reflect(v)).collect(),
            faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect(),
        }
    }

    /// Disjoint union of two meshes.
    pub fn merged(&self, other: &Mesh) -> Mesh {
        let base = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|i| i + base)));
        Mesh { vertices, faces }
    }

    pub fn translated(&self, t: Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn scaled(&self, s: Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| v.component_mul(&s)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Applies `f` to every vertex, keeping faces.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(f).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Unnormalized face normal (twice the area vector).
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.faces[face];
        let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (b - a).cross(&(c - a))
    }

    /// Enclosed volume by the divergence theorem (positive for outward winding).
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c])) / 6.0
            })
            .sum()
    }

    /// Vertex coordinates as a flat `[x0, y0, z0, x1, ...]` vector.
    pub fn flat_coords(&self) -> Vec<f64> {
        self.vertices.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    /// Same faces, vertices replaced from a flat coordinate slice.
    pub fn with_flat_coords(&self, coords: &[f64]) -> Mesh {
        debug_assert_eq!(coords.len(), 3 * self.vertices.len());
        Mesh {
            vertices: coords
                .chunks_exact(3)
                .map(|c| Vec3::new(c[0], c[1], c[2]))
                .collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Deforms `template` by per-vertex offsets.
pub fn apply_offsets(template: &Mesh, offsets: &[Vec3]) -> Result<Mesh> {
    if offsets.len() != template.vertices.len() {
        return Err(Error::Shape(format!(
            "{} offsets for {} vertices",
            offsets.len(),
            template.vertices.len()
        )));
    }
    Ok(Mesh {
        vertices: template
            .vertices
            .iter()
            .zip(offsets)
            .map(|(v, o)| v + o)
            .collect(),
        faces: template.faces.clone(),
    })
}
