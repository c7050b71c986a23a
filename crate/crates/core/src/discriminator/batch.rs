use crate::error::{ensure, Error, Result};
use crate::render::Silhouette;

/// Where a batch of view stacks came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Rendered from reference meshes.
    Real,
    /// Rendered from the mesh being fitted.
    Fake,
}

/// Batch of view stacks, each `views` silhouettes of `resolution`².
/// Stored item-major, then view, then row-major pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewBatch {
    pub views: usize,
    pub resolution: usize,
    pub len: usize,
    pub data: Vec<f64>,
    pub provenance: Provenance,
}

impl ViewBatch {
    pub fn from_stacks(stacks: &[Vec<Silhouette>], provenance: Provenance) -> Result<Self> {
        ensure!(!stacks.is_empty(), Validation, "view batch is empty");
        let views = stacks[0].len();
        ensure!(views > 0, Validation, "view stack is empty");
        let resolution = stacks[0][0].width;
        let mut data = Vec::with_capacity(stacks.len() * views * resolution * resolution);
        for (i, stack) in stacks.iter().enumerate() {
            if stack.len() != views {
                return Err(Error::Shape(format!(
                    "stack {i} has {} views, expected {views}",
                    stack.len()
                )));
            }
            for s in stack {
                if s.width != resolution || s.height != resolution {
                    return Err(Error::Shape(format!(
                        "stack {i} has a {}x{} view, expected {resolution}x{resolution}",
                        s.width, s.height
                    )));
                }
                data.extend_from_slice(&s.values);
            }
        }
        Ok(ViewBatch {
            views,
            resolution,
            len: stacks.len(),
            data,
            provenance,
        })
    }

    pub fn item_len(&self) -> usize {
        self.views * self.resolution * self.resolution
    }

    pub fn item(&self, i: usize) -> &[f64] {
        let n = self.item_len();
        &self.data[i * n..(i + 1) * n]
    }
}
