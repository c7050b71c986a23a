//! Objective terms. Each returns its value together with an analytic
//! gradient, either per pixel (image losses) or per vertex (mesh losses).

mod iou;
mod regularizers;
mod symmetry;
mod total;

pub use iou::{iou_loss, multiscale_silhouette_loss};
pub use regularizers::{flatten_loss, laplacian_loss, FlattenLoss};
pub use symmetry::{image_symmetry_loss, symmetric_pair_loss, vertex_symmetry_loss};
pub use total::{total_gradient, total_loss, LossReport, LossTerms, LossWeights, TermGradients};

use crate::geometry::Vec3;

/// Scalar loss with a gradient per pixel of the first argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageLoss {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Scalar loss with a gradient per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshLoss {
    pub value: f64,
    pub grad: Vec<Vec3>,
}

impl MeshLoss {
    pub fn zero(vertices: usize) -> Self {
        MeshLoss {
            value: 0.0,
            grad: vec![Vec3::zeros(); vertices],
        }
    }
}
