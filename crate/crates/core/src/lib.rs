//! Single-sketch 3D modeling by template deformation.
//!
//! A template mesh is deformed by per-vertex offsets so that its soft
//! silhouette matches a binary sketch, under a weighted objective made of a
//! multi-scale silhouette IoU term, mesh regularizers, reflection-symmetry
//! priors (vertex and image space) and an adversarial multi-view shape
//! discriminator.
//!
//! Module map:
//! - [`geometry`]: meshes, templates, adjacency, reflections, voxel IoU.
//! - [`render`]: cameras and the differentiable soft silhouette rasterizer.
//! - [`losses`]: every objective term with analytic gradients.
//! - [`discriminator`]: the convolutional shape discriminator and GAN losses.
//! - [`optim`]: Adam, learning-rate schedule, gradient checking, fitting.
//! - [`io`]: OBJ, images, sketches, config files, reports.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod discriminator;
pub mod error;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod optim;
pub mod render;

pub use error::{Error, Result};
pub use geometry::{Mesh, SymmetryPlane, Vec3};
pub use render::{Camera, RenderConfig, Silhouette};
