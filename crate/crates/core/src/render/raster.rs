//! Soft silhouette rasterization.
//!
//! Every projected triangle `j` contributes an influence
//! `D_j(p) = sigmoid(delta_j(p) * d_j(p)^2 / sigma)` at pixel centre `p`, with
//! `d_j` the 2D distance from `p` to the triangle boundary in NDC and
//! `delta_j = +1` inside, `-1` outside. Pixels aggregate the influences as a
//! probabilistic union `S = 1 - prod_j (1 - D_j)`, accumulated as a sum of
//! logs so that thousands of overlapping faces do not underflow.

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec3};

use super::camera::ViewFrame;
use super::{Camera, Silhouette};

/// Outside contributions with `d^2 / sigma` beyond this are dropped; their
/// influence is below `exp(-40)`.
const CULL_LOGIT: f64 = 40.0;
/// Faces with a vertex closer than this to the eye plane are not drawn.
const NEAR_DEPTH: f64 = 1e-3;
/// Faces with a smaller projected area (NDC^2) are skipped.
const MIN_PROJECTED_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    /// Sigmoid softness in squared NDC units.
    pub sigma: f64,
    /// Value of uncovered pixels.
    pub background: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            sigma: 1e-4,
            background: 0.0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Validation(format!(
                "render sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0..1.0).contains(&self.background) {
            return Err(Error::Validation(format!(
                "background must lie in [0, 1), got {}",
                self.background
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ProjectedFace {
    vertices: [usize; 3],
    ndc: [[f64; 2]; 3],
    area: f64,
    rows: (usize, usize),
    cols: (usize, usize),
}

/// Forward pass of the soft rasterizer, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct SoftRender {
    silhouette: Silhouette,
    /// `sum_j log(1 - D_j)` per pixel.
    log_empty: Vec<f64>,
    faces: Vec<ProjectedFace>,
    camera_coords: Vec<Vec3>,
    frame: ViewFrame,
    cfg: RenderConfig,
    size: usize,
}

struct PixelHit {
    /// `delta * d^2`.
    signed_d2: f64,
    edge: usize,
    t: f64,
    residual: [f64; 2],
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn pixel_center(row: usize, col: usize, size: usize) -> [f64; 2] {
    let n = size as f64;
    [
        (2 * col + 1) as f64 / n - 1.0,
        1.0 - (2 * row + 1) as f64 / n,
    ]
}

/// Squared distance from `p` to the triangle boundary, signed positive inside.
/// The nearest edge is the lowest-index one among ties.
#[inline]
fn probe(p: [f64; 2], tri: &[[f64; 2]; 3], area: f64) -> PixelHit {
    let mut best = PixelHit {
        signed_d2: f64::INFINITY,
        edge: 0,
        t: 0.0,
        residual: [0.0; 2],
    };
    let mut inside = true;
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let e = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let cross = e[0] * ap[1] - e[1] * ap[0];
        if cross * area < 0.0 {
            inside = false;
        }
        let len2 = e[0] * e[0] + e[1] * e[1];
        let t = if len2 > 0.0 {
            ((ap[0] * e[0] + ap[1] * e[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let r = [ap[0] - t * e[0], ap[1] - t * e[1]];
        let d2 = r[0] * r[0] + r[1] * r[1];
        if d2 < best.signed_d2 {
            best = PixelHit {
                signed_d2: d2,
                edge: k,
                t,
                residual: r,
            };
        }
    }
    if !inside {
        best.signed_d2 = -best.signed_d2;
    }
    best
}

impl SoftRender {
    pub fn forward(mesh: &Mesh, cam: &Camera, cfg: &RenderConfig) -> Result<Self> {
        mesh.validate()?;
        cam.validate()?;
        cfg.validate()?;
        let size = cam.image_size;
        let frame = cam.frame();
        let camera_coords: Vec<Vec3> = mesh
            .vertices
            .iter()
            .map(|v| {
                let rel = v - frame.eye;
                Vec3::new(
                    rel.dot(&frame.right),
                    rel.dot(&frame.up),
                    rel.dot(&frame.forward),
                )
            })
            .collect();

        let margin = (CULL_LOGIT * cfg.sigma).sqrt();
        let n = size as f64;
        let mut faces = Vec::with_capacity(mesh.faces.len());
        for &verts in &mesh.faces {
            let cc = verts.map(|i| camera_coords[i]);
            if cc.iter().any(|c| c.z < NEAR_DEPTH) {
                continue;
            }
            let ndc = cc.map(|c| [c.x / (c.z * frame.focal), c.y / (c.z * frame.focal)]);
            let area = (ndc[1][0] - ndc[0][0]) * (ndc[2][1] - ndc[0][1])
                - (ndc[1][1] - ndc[0][1]) * (ndc[2][0] - ndc[0][0]);
            if area.abs() * 0.5 < MIN_PROJECTED_AREA {
                continue;
            }
            let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in &ndc {
                xlo = xlo.min(p[0]);
                xhi = xhi.max(p[0]);
                ylo = ylo.min(p[1]);
                yhi = yhi.max(p[1]);
            }
            let (xlo, xhi, ylo, yhi) = (xlo - margin, xhi + margin, ylo - margin, yhi + margin);
            let c0 = ((xlo + 1.0) * n / 2.0 - 0.5).ceil().max(0.0);
            let c1 = ((xhi + 1.0) * n / 2.0 - 0.5).floor().min(n - 1.0);
            let r0 = (((1.0 - yhi) * n - 1.0) / 2.0).ceil().max(0.0);
            let r1 = (((1.0 - ylo) * n - 1.0) / 2.0).floor().min(n - 1.0);
            if c0 > c1 || r0 > r1 {
                continue;
            }
            faces.push(ProjectedFace {
                vertices: verts,
                ndc,
                area,
                rows: (r0 as usize, r1 as usize),
                cols: (c0 as usize, c1 as usize),
            });
        }

        let mut log_empty = vec![0.0; size * size];
        for face in &faces {
            for row in face.rows.0..=face.rows.1 {
                for col in face.cols.0..=face.cols.1 {
                    let hit = probe(pixel_center(row, col, size), &face.ndc, face.area);
                    let x = hit.signed_d2 / cfg.sigma;
                    if x < -CULL_LOGIT {
                        continue;
                    }
                    log_empty[row * size + col] -= softplus(x);
                }
            }
        }
        let bg = cfg.background;
        let values = log_empty
            .iter()
            .map(|&a| (bg + (1.0 - bg) * (1.0 - a.exp())).clamp(0.0, 1.0))
            .collect();
        Ok(SoftRender {
            silhouette: Silhouette {
                width: size,
                height: size,
                values,
            },
            log_empty,
            faces,
            camera_coords,
            frame,
            cfg: *cfg,
            size,
        })
    }

    pub fn silhouette(&self) -> &Silhouette {
        &self.silhouette
    }

    pub fn into_silhouette(self) -> Silhouette {
        self.silhouette
    }

    /// Vector-Jacobian product: per-vertex gradients of `sum_p upstream[p] * S(p)`.
    pub fn backward(&self, upstream: &[f64]) -> Result<Vec<Vec3>> {
        let size = self.size;
        if upstream.len() != size * size {
            return Err(Error::Shape(format!(
                "{} upstream values for a {size}x{size} render",
                upstream.len()
            )));
        }
        let sigma = self.cfg.sigma;
        let scale = 1.0 - self.cfg.background;
        let mut grad = vec![Vec3::zeros(); self.camera_coords.len()];
        for face in &self.faces {
            let mut g2 = [[0.0f64; 2]; 3];
            for row in face.rows.0..=face.rows.1 {
                for col in face.cols.0..=face.cols.1 {
                    let idx = row * size + col;
                    let up = upstream[idx];
                    if up == 0.0 {
                        continue;
                    }
                    let hit = probe(pixel_center(row, col, size), &face.ndc, face.area);
                    let x = hit.signed_d2 / sigma;
                    if x < -CULL_LOGIT {
                        continue;
                    }
                    // dS/dx = (1 - bg) * prod(1 - D) * D, dx/d(d^2) = delta / sigma.
                    let delta = if hit.signed_d2 >= 0.0 { 1.0 } else { -1.0 };
                    let coef = up * scale * self.log_empty[idx].exp() * sigmoid(x) * delta / sigma;
                    if coef == 0.0 {
                        continue;
                    }
                    // d(d^2)/da = -2 r (1 - t), d(d^2)/db = -2 r t.
                    let (a, b) = (hit.edge, (hit.edge + 1) % 3);
                    let r = hit.residual;
                    let wa = -2.0 * coef * (1.0 - hit.t);
                    let wb = -2.0 * coef * hit.t;
                    g2[a][0] += wa * r[0];
                    g2[a][1] += wa * r[1];
                    g2[b][0] += wb * r[0];
                    g2[b][1] += wb * r[1];
                }
            }
            for k in 0..3 {
                let vi = face.vertices[k];
                let c = self.camera_coords[vi];
                let inv = 1.0 / (c.z * self.frame.focal);
                let (gx, gy) = (g2[k][0], g2[k][1]);
                let gz = -(gx * c.x + gy * c.y) * inv / c.z;
                grad[vi] += self.frame.right * (gx * inv)
                    + self.frame.up * (gy * inv)
                    + self.frame.forward * gz;
            }
        }
        Ok(grad)
    }
}

/// Soft silhouette of `mesh` seen from `cam`.
pub fn soft_silhouette(mesh: &Mesh, cam: &Camera, cfg: &RenderConfig) -> Result<Silhouette> {
    Ok(SoftRender::forward(mesh, cam, cfg)?.into_silhouette())
}
