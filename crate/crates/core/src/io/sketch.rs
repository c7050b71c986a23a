use std::collections::VecDeque;
use std::path::Path;

use super::image::{load_gray, save_gray, GrayImage};
use crate::error::{ensure, Result};
use crate::geometry::Mesh;
use crate::render::{soft_silhouette, Camera, RenderConfig, Silhouette};

/// Binary sketch: 0 marks a stroke, 1 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u8>,
}

impl SketchImage {
    /// Pixels below 128 are strokes.
    pub fn from_gray(img: &GrayImage) -> Self {
        SketchImage {
            width: img.width,
            height: img.height,
            values: img.pixels.iter().map(|&p| u8::from(p >= 128)).collect(),
        }
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .values
                .iter()
                .map(|&v| if v == 0 { 0 } else { 255 })
                .collect(),
        }
    }

    pub fn stroke_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchMode {
    /// Filled silhouette.
    Silhouette,
    /// One-pixel outline of the silhouette.
    Edge,
}

impl std::str::FromStr for SketchMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "silhouette" => Ok(SketchMode::Silhouette),
            "edge" => Ok(SketchMode::Edge),
            other => Err(crate::error::Error::Validation(format!(
                "unknown sketch mode {other:?} (expected silhouette or edge)"
            ))),
        }
    }
}

/// The occupancy a sketch bounds: strokes plus every background pixel not
/// 4-connected to the image border. Also reports whether any region was
/// enclosed.
pub fn fill_sketch(sketch: &SketchImage) -> (Silhouette, bool) {
    let (w, h) = (sketch.width, sketch.height);
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed =
        |r: usize, c: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
            let i = r * w + c;
            if sketch.values[i] == 1 && !outside[i] {
                outside[i] = true;
                queue.push_back((r, c));
            }
        };
    for c in 0..w {
        seed(0, c, &mut outside, &mut queue);
        seed(h - 1, c, &mut outside, &mut queue);
    }
    for r in 0..h {
        seed(r, 0, &mut outside, &mut queue);
        seed(r, w - 1, &mut outside, &mut queue);
    }
    while let Some((r, c)) = queue.pop_front() {
        if r > 0 {
            seed(r - 1, c, &mut outside, &mut queue);
        }
        if r + 1 < h {
            seed(r + 1, c, &mut outside, &mut queue);
        }
        if c > 0 {
            seed(r, c - 1, &mut outside, &mut queue);
        }
        if c + 1 < w {
            seed(r, c + 1, &mut outside, &mut queue);
        }
    }
    let enclosed = sketch
        .values
        .iter()
        .zip(&outside)
        .any(|(&v, &o)| v == 1 && !o);
    let target = Silhouette::from_fn(w, h, |r, c| f64::from(u8::from(!outside[r * w + c])));
    (target, enclosed)
}

/// A sketch read from disk with the silhouette it bounds.
#[derive(Debug, Clone)]
pub struct LoadedSketch {
    pub sketch: SketchImage,
    pub target: Silhouette,
}

pub fn load_sketch(path: &Path) -> Result<LoadedSketch> {
    let sketch = SketchImage::from_gray(&load_gray(path)?);
    let (target, enclosed) = fill_sketch(&sketch);
    if sketch.stroke_count() == 0 {
        log::warn!("{}: sketch has no strokes, target is empty", path.display());
    } else if !enclosed {
        log::warn!(
            "{}: no closed contour found, using the stroke mask as target",
            path.display()
        );
    }
    Ok(LoadedSketch { sketch, target })
}

pub fn save_sketch(sketch: &SketchImage, path: &Path) -> Result<()> {
    save_gray(&sketch.to_gray(), path)
}

/// Renders `mesh`, thresholds at 0.5 and converts to a sketch.
pub fn synth_sketch(
    mesh: &Mesh,
    cam: &Camera,
    mode: SketchMode,
    cfg: &RenderConfig,
) -> Result<SketchImage> {
    let mask = soft_silhouette(mesh, cam, cfg)?.threshold(0.5);
    ensure!(
        mask.sum() > 0.0,
        Degenerate,
        "mesh renders to an empty silhouette"
    );
    let (w, h) = (mask.width, mask.height);
    let on = |r: isize, c: isize| {
        r >= 0
            && c >= 0
            && (r as usize) < h
            && (c as usize) < w
            && mask.get(r as usize, c as usize) > 0.5
    };
    let values = (0..h * w)
        .map(|i| {
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            let stroke = match mode {
                SketchMode::Silhouette => on(r, c),
                SketchMode::Edge => {
                    let interior = (-1..=1).all(|dr| (-1..=1).all(|dc| on(r + dr, c + dc)));
                    on(r, c) && !interior
                }
            };
            u8::from(!stroke)
        })
        .collect();
    Ok(SketchImage {
        width: w,
        height: h,
        values,
    })
}
