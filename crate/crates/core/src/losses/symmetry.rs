use crate::error::{Error, Result};
use crate::geometry::{nearest_reflected, reflection_matrix, Mesh, SymmetryPlane};
use crate::render::{hflip, mirror_camera, Camera, RenderConfig, Silhouette, SoftRender};

use super::MeshLoss;

/// Mean squared distance between each reflected vertex and its nearest vertex.
///
/// The gradient treats the nearest-neighbour assignment as fixed, which is
/// exact away from assignment switches.
pub fn vertex_symmetry_loss(mesh: &Mesh, plane: &SymmetryPlane) -> Result<MeshLoss> {
    let n = mesh.vertices.len();
    if n == 0 {
        return Err(Error::Degenerate("vertex symmetry of an empty mesh".into()));
    }
    let t = reflection_matrix(plane);
    let matches = nearest_reflected(mesh, plane);
    let scale = 2.0 / n as f64;
    let mut loss = MeshLoss::zero(n);
    for (i, &(j, d2)) in matches.iter().enumerate() {
        loss.value += d2;
        let r = plane.reflect(&mesh.vertices[i]) - mesh.vertices[j];
        loss.grad[i] += t.transpose() * r * scale;
        loss.grad[j] -= r * scale;
    }
    loss.value /= n as f64;
    Ok(loss)
}

/// `sum_{j,k} (hflip(first) - mirrored)^2` for one camera pair.
pub fn symmetric_pair_loss(first: &Silhouette, mirrored: &Silhouette) -> Result<f64> {
    if !first.same_shape(mirrored) {
        return Err(Error::Shape("image symmetry renders differ in size".into()));
    }
    let flipped = hflip(first);
    Ok(flipped
        .values
        .iter()
        .zip(&mirrored.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum())
}

/// Compares, for each view, the horizontally flipped render against the
/// render from the view mirrored through `plane`; sums over pixels and
/// averages over views.
pub fn image_symmetry_loss(
    mesh: &Mesh,
    views: &[Camera],
    plane: &SymmetryPlane,
    cfg: &RenderConfig,
) -> Result<MeshLoss> {
    if views.is_empty() {
        return Err(Error::Validation(
            "image symmetry loss needs at least one view".into(),
        ));
    }
    let m = views.len() as f64;
    let mut loss = MeshLoss::zero(mesh.vertices.len());
    for view in views {
        let first = SoftRender::forward(mesh, view, cfg)?;
        let second = SoftRender::forward(mesh, &mirror_camera(view, plane)?, cfg)?;
        let (a, b) = (first.silhouette(), second.silhouette());
        let w = a.width;
        let mut up_first = vec![0.0; a.values.len()];
        let mut up_second = vec![0.0; b.values.len()];
        let mut value = 0.0;
        for r in 0..a.height {
            for c in 0..w {
                let diff = a.get(r, w - 1 - c) - b.get(r, c);
                value += diff * diff;
                up_first[r * w + (w - 1 - c)] = 2.0 * diff / m;
                up_second[r * w + c] = -2.0 * diff / m;
            }
        }
        loss.value += value / m;
        for (g, d) in loss.grad.iter_mut().zip(first.backward(&up_first)?) {
            *g += d;
        }
        for (g, d) in loss.grad.iter_mut().zip(second.backward(&up_second)?) {
            *g += d;
        }
    }
    Ok(loss)
}
