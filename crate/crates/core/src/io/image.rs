use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};
use crate::render::Silhouette;

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    /// Maps `[0, 1]` to `0..=255`, rounding to nearest.
    pub fn from_silhouette(s: &Silhouette) -> Self {
        GrayImage {
            width: s.width,
            height: s.height,
            pixels: s
                .values
                .iter()
                .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect(),
        }
    }
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Loads an 8-bit grayscale PNG or PGM; any other pixel format is rejected.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| image_error(path, e))?;
    match img {
        DynamicImage::ImageLuma8(buf) => Ok(GrayImage {
            width: buf.width() as usize,
            height: buf.height() as usize,
            pixels: buf.into_raw(),
        }),
        other => Err(Error::Format(format!(
            "{}: expected 8-bit grayscale, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

/// Saves as PNG or binary PGM, chosen by the file extension.
pub fn save_gray(img: &GrayImage, path: &Path) -> Result<()> {
    image::save_buffer(
        path,
        &img.pixels,
        img.width as u32,
        img.height as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|e| image_error(path, e))
}
