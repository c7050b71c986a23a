use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{SymmetryPlane, Vec3};

/// Eye distance at which the unit sphere fills roughly 70% of the frame.
pub const DEFAULT_DISTANCE: f64 = 2.732;
/// Full vertical (and horizontal) field of view in degrees.
pub const DEFAULT_FOV: f64 = 60.0;
/// Elevation range for random discriminator and symmetry views.
pub const VIEW_ELEVATION_RANGE: (f64, f64) = (-20.0, 40.0);

/// Perspective look-at camera on a sphere around `target`, world up `+y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    /// Degrees, rotation about `+y` starting from `+z`.
    pub azimuth: f64,
    /// Degrees, strictly inside (-90, 90).
    pub elevation: f64,
    pub distance: f64,
    /// Full field of view in degrees.
    pub fov: f64,
    pub image_size: usize,
    pub target: Vec3,
}

/// Orthonormal view frame: `right` maps to image +x, `up` to image +y,
/// `forward` points from the eye into the scene.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ViewFrame {
    pub eye: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    /// `tan(fov / 2)`.
    pub focal: f64,
}

impl Camera {
    pub fn new(
        azimuth: f64,
        elevation: f64,
        distance: f64,
        fov: f64,
        image_size: usize,
    ) -> Result<Self> {
        let cam = Camera {
            azimuth,
            elevation,
            distance,
            fov,
            image_size,
            target: Vec3::zeros(),
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if !(self.azimuth.is_finite() && self.elevation.is_finite()) {
            return bad(format!(
                "camera angles must be finite ({}, {})",
                self.azimuth, self.elevation
            ));
        }
        if self.elevation.abs() >= 90.0 {
            return bad(format!(
                "elevation {} is at or beyond the pole; the up vector is degenerate",
                self.elevation
            ));
        }
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return bad(format!(
                "camera distance must be positive, got {}",
                self.distance
            ));
        }
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return bad(format!(
                "field of view must lie in (0, 180), got {}",
                self.fov
            ));
        }
        if self.image_size < 8 || !self.image_size.is_power_of_two() {
            return bad(format!(
                "image size must be a power of two >= 8, got {}",
                self.image_size
            ));
        }
        if !self.target.iter().all(|c| c.is_finite()) {
            return bad("camera target must be finite".into());
        }
        Ok(())
    }

    pub fn with_image_size(mut self, image_size: usize) -> Result<Self> {
        self.image_size = image_size;
        self.validate()?;
        Ok(self)
    }

    /// Eye position in world space.
    pub fn eye(&self) -> Vec3 {
        let (a, e) = (self.azimuth.to_radians(), self.elevation.to_radians());
        self.target + self.distance * Vec3::new(e.cos() * a.sin(), e.sin(), e.cos() * a.cos())
    }

    pub(crate) fn frame(&self) -> ViewFrame {
        let eye = self.eye();
        let forward = (self.target - eye).normalize();
        let right = forward.cross(&Vec3::y()).normalize();
        let up = right.cross(&forward);
        ViewFrame {
            eye,
            right,
            up,
            forward,
            focal: (self.fov.to_radians() / 2.0).tan(),
        }
    }
}

/// Camera looking at the origin from the given angles, with the default field of view.
pub fn camera_from_angles(
    azimuth: f64,
    elevation: f64,
    distance: f64,
    image_size: usize,
) -> Result<Camera> {
    Camera::new(azimuth, elevation, distance, DEFAULT_FOV, image_size)
}

/// Reflects the camera's eye and target through `plane`.
///
/// For vertical planes (normal orthogonal to world up) the reflection is a
/// pure azimuth change, so `x = 0` maps azimuth `a` to `-a` exactly. For such
/// planes, rendering a mirror-symmetric mesh from the returned camera gives
/// the horizontal flip of rendering it from `cam`.
pub fn mirror_camera(cam: &Camera, plane: &SymmetryPlane) -> Result<Camera> {
    let n = plane.normal();
    let target = plane.reflect(&cam.target);
    let mirrored = if n.y == 0.0 {
        // Reflection of a horizontal direction at angle `a` about the plane's
        // trace at angle `phi + 90` is `2 phi + 180 - a`, i.e. `-a + 2(phi - 90)`.
        let mut shift = 2.0 * (n.x.atan2(n.z).to_degrees() - 90.0);
        if shift.abs() < 1e-12 {
            shift = 0.0;
        }
        Camera {
            azimuth: -cam.azimuth + shift,
            target,
            ..*cam
        }
    } else {
        let offset = plane.reflect(&cam.eye()) - target;
        let distance = offset.norm();
        let elevation = (offset.y / distance).clamp(-1.0, 1.0).asin().to_degrees();
        let raw = offset.x.atan2(offset.z).to_degrees();
        let reference = -cam.azimuth;
        Camera {
            azimuth: raw + 360.0 * ((reference - raw) / 360.0).round(),
            elevation,
            distance,
            target,
            ..*cam
        }
    };
    mirrored.validate()?;
    Ok(mirrored)
}

/// `count` cameras at the default distance with azimuth uniform in
/// `[0, 360)` and elevation uniform in `[-20, 40]` degrees.
pub fn sample_random_views(count: usize, seed: u64, image_size: usize) -> Result<Vec<Camera>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_views_with(&mut rng, count, image_size)
}

pub(crate) fn sample_views_with<R: Rng>(
    rng: &mut R,
    count: usize,
    image_size: usize,
) -> Result<Vec<Camera>> {
    let (lo, hi) = VIEW_ELEVATION_RANGE;
    (0..count)
        .map(|_| {
            let az = rng.gen_range(0.0..360.0);
            let el = rng.gen_range(lo..=hi);
            camera_from_angles(az, el, DEFAULT_DISTANCE, image_size)
        })
        .collect()
}
