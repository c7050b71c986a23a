//! Finite-difference checks of every objective term on a small perturbed
//! icosphere with 16x16 renders.

use std::fmt;
use std::str::FromStr;

use super::gradcheck::{gradcheck, GradcheckReport};
use super::objective::{AdversarialTerm, Objective};
use super::AdamState;
use crate::discriminator::{disc_init, disc_train_step, DiscParams, Provenance, ViewBatch};
use crate::error::{Error, Result};
use crate::geometry::{adjacency, icosphere, primitives, Adjacency, Mesh, SymmetryPlane, Vec3};
use crate::losses::{
    flatten_loss, image_symmetry_loss, iou_loss, laplacian_loss, multiscale_silhouette_loss,
    vertex_symmetry_loss, LossWeights, MeshLoss,
};
use crate::render::{
    camera_from_angles, sample_random_views, soft_silhouette, Camera, RenderConfig, SoftRender,
    DEFAULT_DISTANCE,
};

pub const GRADCHECK_RESOLUTION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Iou,
    Sp,
    Vsym,
    Isym,
    Laplacian,
    Flatten,
    Sd,
    Full,
}

impl Term {
    pub const ALL: [Term; 8] = [
        Term::Iou,
        Term::Sp,
        Term::Vsym,
        Term::Isym,
        Term::Laplacian,
        Term::Flatten,
        Term::Sd,
        Term::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::Iou => "iou",
            Term::Sp => "sp",
            Term::Vsym => "vsym",
            Term::Isym => "isym",
            Term::Laplacian => "lap",
            Term::Flatten => "flat",
            Term::Sd => "sd",
            Term::Full => "full",
        }
    }

    /// Finite-difference step. Render-based terms are sharp at the default
    /// softness and need a small step; the purely geometric terms are
    /// polynomial-like and a larger step keeps rounding error down.
    pub fn default_step(self) -> f64 {
        match self {
            Term::Vsym | Term::Laplacian | Term::Flatten => 1e-4,
            _ => 1e-5,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Term::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown gradient term {s:?}")))
    }
}

/// Fixed inputs shared by every check.
pub struct GradcheckFixture {
    pub mesh: Mesh,
    pub adjacency: Adjacency,
    pub camera: Camera,
    pub target: crate::render::Silhouette,
    pub views: Vec<Camera>,
    pub plane: SymmetryPlane,
    pub render: RenderConfig,
    pub disc: DiscParams,
    pub real: ViewBatch,
}

impl GradcheckFixture {
    /// icosphere(1) with a smooth asymmetric warp, a cube target and a
    /// briefly trained discriminator so every term has a nonzero gradient.
    pub fn new() -> Result<Self> {
        let res = GRADCHECK_RESOLUTION;
        let mesh = icosphere(1)?.map_vertices(|v| {
            Vec3::new(
                0.8 * v.x + 0.08 * (2.0 * v.y).sin() + 0.05,
                0.7 * v.y + 0.06 * v.x * v.z,
                0.75 * v.z + 0.04 * (3.0 * v.x).cos(),
            )
        });
        let adjacency = adjacency(&mesh)?;
        let render = RenderConfig::default();
        let camera = camera_from_angles(15.0, 10.0, DEFAULT_DISTANCE, res)?;
        let target = soft_silhouette(&primitives::cube(1.0), &camera, &render)?.threshold(0.5);
        let views = sample_random_views(2, 7, res)?;
        let plane = SymmetryPlane::default();
        let stack = |m: &Mesh| {
            views
                .iter()
                .map(|v| soft_silhouette(m, v, &render))
                .collect::<Result<Vec<_>>>()
        };
        let real = ViewBatch::from_stacks(
            &[
                stack(&primitives::cube(0.9))?,
                stack(&primitives::ellipsoid(Vec3::new(0.6, 0.5, 0.4), 2))?,
            ],
            Provenance::Real,
        )?;
        let fake = ViewBatch::from_stacks(&[stack(&mesh)?], Provenance::Fake)?;
        let mut disc = disc_init(views.len(), res, 3)?;
        let mut state = AdamState::new(disc.values.len());
        for _ in 0..5 {
            disc_train_step(&mut disc, &real, &fake, &mut state, 1e-3)?;
        }
        Ok(GradcheckFixture {
            mesh,
            adjacency,
            camera,
            target,
            views,
            plane,
            render,
            disc,
            real,
        })
    }

    fn objective<'a>(&'a self, weights: &'a LossWeights) -> Objective<'a> {
        Objective {
            target: &self.target,
            camera: self.camera,
            views: &self.views,
            plane: self.plane,
            weights,
            render: self.render,
            adjacency: &self.adjacency,
            adversarial: Some(AdversarialTerm {
                params: &self.disc,
                real: &self.real,
            }),
        }
    }

    fn render_loss(
        &self,
        mesh: &Mesh,
        image_loss: impl Fn(&crate::render::Silhouette) -> Result<crate::losses::ImageLoss>,
    ) -> Result<MeshLoss> {
        let r = SoftRender::forward(mesh, &self.camera, &self.render)?;
        let l = image_loss(r.silhouette())?;
        Ok(MeshLoss {
            value: l.value,
            grad: r.backward(&l.grad)?,
        })
    }

    /// Value and gradient of one term at `mesh`.
    pub fn loss(&self, term: Term, mesh: &Mesh) -> Result<MeshLoss> {
        let only = |sd: f64| LossWeights {
            scale_weights: vec![0.25; 4],
            lambda_sd: sd,
            lambda_sv: 0.0,
            lambda_isym: 0.0,
            laplacian: 0.0,
            flatten: 0.0,
        };
        match term {
            Term::Iou => self.render_loss(mesh, |s| iou_loss(s, &self.target)),
            Term::Sp => self.render_loss(mesh, |s| {
                multiscale_silhouette_loss(s, &self.target, &[0.25; 4])
            }),
            Term::Vsym => vertex_symmetry_loss(mesh, &self.plane),
            Term::Isym => image_symmetry_loss(mesh, &self.views, &self.plane, &self.render),
            Term::Laplacian => Ok(laplacian_loss(mesh, &self.adjacency)),
            Term::Flatten => Ok(flatten_loss(mesh, &self.adjacency).loss),
            Term::Sd => {
                // total minus the silhouette part isolates lambda_sd * L_sd
                let w = only(1.0);
                let with = self.objective(&w).mesh_loss(mesh)?;
                let w0 = only(0.0);
                let without = self.objective(&w0).mesh_loss(mesh)?;
                Ok(MeshLoss {
                    value: with.value - without.value,
                    grad: with
                        .grad
                        .iter()
                        .zip(&without.grad)
                        .map(|(a, b)| a - b)
                        .collect(),
                })
            }
            Term::Full => {
                let w = LossWeights::default();
                self.objective(&w).mesh_loss(mesh)
            }
        }
    }

    pub fn check(&self, term: Term, h: f64) -> Result<GradcheckReport> {
        gradcheck(|m| self.loss(term, m), &self.mesh, h)
    }
}
