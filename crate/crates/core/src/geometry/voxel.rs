use crate::error::{Error, Result};

use super::{adjacency, Mesh, Vec3};

/// Axis-aligned box with positive extent on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl Bounds {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        let ext = max - min;
        if !ext.iter().all(|e| e.is_finite() && *e > 0.0) {
            return Err(Error::Degenerate(format!(
                "bounds {min:?}..{max:?} have a non-positive extent"
            )));
        }
        Ok(Bounds { min, max })
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Grows every side by `fraction` of the box extent on that axis.
    /// Flat axes are widened using the largest extent.
    pub fn padded(min: Vec3, max: Vec3, fraction: f64) -> Result<Self> {
        let ext = max - min;
        let largest = ext.max().max(1e-9);
        let pad = ext.map(|e| {
            if e > 1e-12 {
                e * fraction
            } else {
                largest * fraction
            }
        });
        Bounds::new(min - pad, max + pad)
    }
}

/// Occupancy of a regular grid of `resolution^3` cells, x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub resolution: usize,
    pub bounds: Bounds,
    pub occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.resolution * (iy + self.resolution * iz)
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> bool {
        self.occupancy[self.index(ix, iy, iz)]
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn cell_size(&self) -> Vec3 {
        self.bounds.extent() / self.resolution as f64
    }

    pub fn cell_center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let c = self.cell_size();
        self.bounds.min
            + Vec3::new(
                (ix as f64 + 0.5) * c.x,
                (iy as f64 + 0.5) * c.y,
                (iz as f64 + 0.5) * c.z,
            )
    }
}

// Fixed sub-cell offsets applied to every ray so rays do not pass exactly
// through triangle edges or vertices lying on grid-aligned coordinates.
const NUDGE_Y: f64 = 3.183_098_861e-7;
const NUDGE_Z: f64 = 1.618_033_988e-7;

struct ProjectedTriangle {
    pts: [[f64; 3]; 3],
    area: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

/// Marks every cell whose centre lies inside `mesh`, using crossing parity of
/// a ray cast along `+x` from the centre.
pub fn voxelize(mesh: &Mesh, bounds: Bounds, resolution: usize) -> Result<VoxelGrid> {
    if resolution == 0 {
        return Err(Error::Validation(
            "voxel resolution must be positive".into(),
        ));
    }
    let mut grid = VoxelGrid {
        resolution,
        bounds,
        occupancy: vec![false; resolution.pow(3)],
    };
    let cell = grid.cell_size();
    let tris: Vec<ProjectedTriangle> = mesh
        .faces
        .iter()
        .filter_map(|&[a, b, c]| {
            let p = [a, b, c].map(|i| {
                let v = mesh.vertices[i];
                [v.x, v.y, v.z]
            });
            let area = orient(p[0], p[1], [0.0, p[2][1], p[2][2]]);
            if area.abs() < 1e-300 {
                return None;
            }
            let lo = [
                p[0][1].min(p[1][1]).min(p[2][1]),
                p[0][2].min(p[1][2]).min(p[2][2]),
            ];
            let hi = [
                p[0][1].max(p[1][1]).max(p[2][1]),
                p[0][2].max(p[1][2]).max(p[2][2]),
            ];
            Some(ProjectedTriangle {
                pts: p,
                area,
                lo,
                hi,
            })
        })
        .collect();

    let mut hits: Vec<f64> = Vec::new();
    for iz in 0..resolution {
        let z = bounds.min.z + (iz as f64 + 0.5) * cell.z + NUDGE_Z * cell.z;
        for iy in 0..resolution {
            let y = bounds.min.y + (iy as f64 + 0.5) * cell.y + NUDGE_Y * cell.y;
            hits.clear();
            for t in &tris {
                if y < t.lo[0] || y > t.hi[0] || z < t.lo[1] || z > t.hi[1] {
                    continue;
                }
                let q = [0.0, y, z];
                let [a, b, c] = t.pts;
                let w0 = orient(b, c, q);
                let w1 = orient(c, a, q);
                let w2 = orient(a, b, q);
                let inside = if t.area > 0.0 {
                    w0 > 0.0 && w1 > 0.0 && w2 > 0.0
                } else {
                    w0 < 0.0 && w1 < 0.0 && w2 < 0.0
                };
                if inside {
                    hits.push((w0 * a[0] + w1 * b[0] + w2 * c[0]) / t.area);
                }
            }
            if hits.is_empty() {
                continue;
            }
            hits.sort_by(f64::total_cmp);
            // Crossings strictly beyond the centre: hits.len() - (# hits <= x).
            let mut passed = 0;
            for ix in 0..resolution {
                let x = bounds.min.x + (ix as f64 + 0.5) * cell.x;
                while passed < hits.len() && hits[passed] <= x {
                    passed += 1;
                }
                if (hits.len() - passed) % 2 == 1 {
                    let idx = grid.index(ix, iy, iz);
                    grid.occupancy[idx] = true;
                }
            }
        }
    }
    Ok(grid)
}

/// 2D orientation in the (y, z) plane.
fn orient(a: [f64; 3], b: [f64; 3], p: [f64; 3]) -> f64 {
    (b[1] - a[1]) * (p[2] - a[2]) - (b[2] - a[2]) * (p[1] - a[1])
}

/// Intersection over union of the two meshes' occupancies on a shared grid
/// spanning their union's bounding box padded by 5%.
pub fn voxel_iou(a: &Mesh, b: &Mesh, resolution: usize) -> Result<f64> {
    for (name, m) in [("first", a), ("second", b)] {
        m.validate()?;
        if !adjacency(m)?.is_closed() {
            return Err(Error::Validation(format!(
                "{name} mesh is not closed; voxel IoU needs watertight meshes"
            )));
        }
    }
    let (lo, hi) = match (a.bounds(), b.bounds()) {
        (Some((l1, h1)), Some((l2, h2))) => (l1.inf(&l2), h1.sup(&h2)),
        (Some(bb), None) | (None, Some(bb)) => bb,
        (None, None) => return Err(Error::Degenerate("both meshes are empty".into())),
    };
    let bounds = Bounds::padded(lo, hi, 0.05)?;
    let va = voxelize(a, bounds, resolution)?;
    let vb = voxelize(b, bounds, resolution)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in va.occupancy.iter().zip(&vb.occupancy) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Err(Error::Degenerate("both voxelizations are empty".into()));
    }
    Ok(inter as f64 / union as f64)
}
