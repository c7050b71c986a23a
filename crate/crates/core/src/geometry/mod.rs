//! Meshes, templates, adjacency, reflection symmetry and voxel evaluation.

mod adjacency;
mod icosphere;
mod mesh;
pub mod primitives;
mod symmetry;
mod voxel;

pub use adjacency::{adjacency, Adjacency, Edge};
pub use icosphere::{icosphere, MAX_SUBDIVISIONS};
pub use mesh::{apply_offsets, Mesh, Vec3};
pub use symmetry::{asymmetry_distance, nearest_reflected, reflection_matrix, SymmetryPlane};
pub use voxel::{voxel_iou, voxelize, Bounds, VoxelGrid};
