//! Cameras, silhouettes and the differentiable soft rasterizer.

mod camera;
mod raster;
mod silhouette;

pub use camera::{
    camera_from_angles, mirror_camera, sample_random_views, Camera, DEFAULT_DISTANCE, DEFAULT_FOV,
    VIEW_ELEVATION_RANGE,
};
pub use raster::{soft_silhouette, RenderConfig, SoftRender};
pub use silhouette::{downsample, downsample_adjoint, hflip, Silhouette};
