use nalgebra::Matrix3;

use crate::error::{Error, Result};

use super::{Mesh, Vec3};

/// Reflection plane `{x : normal . x = offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryPlane {
    normal: Vec3,
    offset: f64,
}

impl Default for SymmetryPlane {
    /// The `x = 0` plane.
    fn default() -> Self {
        SymmetryPlane {
            normal: Vec3::x(),
            offset: 0.0,
        }
    }
}

impl SymmetryPlane {
    pub const UNIT_TOLERANCE: f64 = 1e-9;

    pub fn new(normal: Vec3, offset: f64) -> Result<Self> {
        if !normal.iter().all(|c| c.is_finite()) || !offset.is_finite() {
            return Err(Error::Validation(format!(
                "symmetry plane must be finite, got normal {normal:?} offset {offset}"
            )));
        }
        if (normal.norm() - 1.0).abs() > Self::UNIT_TOLERANCE {
            return Err(Error::Validation(format!(
                "symmetry plane normal must be unit length, |n| = {}",
                normal.norm()
            )));
        }
        Ok(SymmetryPlane { normal, offset })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `T (p - d n) + d n` with `T = I - 2 n n^T`.
    pub fn reflect(&self, p: &Vec3) -> Vec3 {
        p - self.normal * (2.0 * (self.normal.dot(p) - self.offset))
    }
}

/// Householder matrix `I - 2 n n^T` of the plane's normal.
pub fn reflection_matrix(plane: &SymmetryPlane) -> Matrix3<f64> {
    let n = plane.normal;
    Matrix3::identity() - n * n.transpose() * 2.0
}

/// For every vertex, the index of the vertex nearest to its reflection and
/// the squared distance. Ties go to the lowest index.
pub fn nearest_reflected(mesh: &Mesh, plane: &SymmetryPlane) -> Vec<(usize, f64)> {
    mesh.vertices
        .iter()
        .map(|v| {
            let r = plane.reflect(v);
            let mut best = (0, f64::INFINITY);
            for (j, w) in mesh.vertices.iter().enumerate() {
                let d = (r - w).norm_squared();
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect()
}

/// Mean squared distance from each reflected vertex to its nearest vertex.
pub fn asymmetry_distance(mesh: &Mesh, plane: &SymmetryPlane) -> Result<f64> {
    if mesh.vertices.is_empty() {
        return Err(Error::Degenerate("asymmetry of an empty mesh".into()));
    }
    let matches = nearest_reflected(mesh, plane);
    Ok(matches.iter().map(|m| m.1).sum::<f64>() / mesh.vertices.len() as f64)
}
