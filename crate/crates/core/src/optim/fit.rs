use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::objective::{AdversarialTerm, Objective};
use super::{adam_step, gradcheck::flatten, lr_at, AdamState};
use crate::discriminator::{disc_init, disc_update, Provenance, ViewBatch};
use crate::error::{ensure, Error, Result};
use crate::geometry::{
    adjacency, apply_offsets, asymmetry_distance, primitives, Mesh, SymmetryPlane, Vec3,
};
use crate::losses::{LossReport, LossWeights};
use crate::render::{
    camera_from_angles, downsample, sample_random_views, soft_silhouette, Camera, RenderConfig,
    Silhouette, DEFAULT_DISTANCE,
};

/// Settings of one fitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub weights: LossWeights,
    pub render: RenderConfig,
    /// Render resolution of each stage, strictly increasing powers of two.
    pub resolutions: Vec<usize>,
    pub steps_per_stage: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub lr_period: usize,
    pub seed: u64,
    pub enable_sd: bool,
    /// Vertex and image symmetry terms.
    pub enable_sp: bool,
    pub plane: SymmetryPlane,
    /// Viewpoint of the target silhouette.
    pub camera_azimuth: f64,
    pub camera_elevation: f64,
    pub camera_distance: f64,
    /// Random views drawn per step for the image symmetry and adversarial terms.
    pub views: usize,
    /// Resolution of the random-view renders.
    pub view_resolution: usize,
    pub disc_learning_rate: f64,
    /// Number of procedural meshes in the default real pool.
    pub real_pool_size: usize,
    /// Real view stacks per discriminator step.
    pub real_batch: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            weights: LossWeights::default(),
            render: RenderConfig::default(),
            resolutions: vec![32, 64, 128],
            steps_per_stage: 200,
            learning_rate: 1e-2,
            lr_decay: 0.3,
            lr_period: 800,
            seed: 0,
            enable_sd: true,
            enable_sp: true,
            plane: SymmetryPlane::default(),
            camera_azimuth: 0.0,
            camera_elevation: 0.0,
            camera_distance: DEFAULT_DISTANCE,
            views: 4,
            view_resolution: 32,
            disc_learning_rate: 1e-4,
            real_pool_size: 8,
            real_batch: 2,
        }
    }
}

impl FitConfig {
    /// Desk-scale settings for toy fits: one 64x64 stage of 500 steps,
    /// lighter regularizers and a smaller image-symmetry weight.
    pub fn toy() -> Self {
        let mut cfg = FitConfig {
            resolutions: vec![64],
            steps_per_stage: 500,
            ..FitConfig::default()
        };
        cfg.weights.laplacian = 0.03;
        cfg.weights.flatten = 0.03;
        cfg.weights.lambda_isym = 0.01;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.render.validate()?;
        ensure!(
            !self.resolutions.is_empty(),
            Validation,
            "at least one stage resolution is required"
        );
        for (i, &r) in self.resolutions.iter().enumerate() {
            ensure!(
                r >= 8 && r.is_power_of_two(),
                Validation,
                "stage resolution {r} is not a power of two >= 8"
            );
            ensure!(
                i == 0 || r > self.resolutions[i - 1],
                Validation,
                "stage resolutions must be strictly increasing"
            );
            ensure!(
                r >> (self.weights.scale_weights.len() - 1) >= 1,
                Validation,
                "stage resolution {r} is too small for {} scales",
                self.weights.scale_weights.len()
            );
        }
        ensure!(
            self.learning_rate >= 0.0 && self.learning_rate.is_finite(),
            Validation,
            "learning rate must be finite and >= 0"
        );
        ensure!(
            self.disc_learning_rate >= 0.0 && self.disc_learning_rate.is_finite(),
            Validation,
            "discriminator learning rate must be finite and >= 0"
        );
        ensure!(
            self.lr_decay > 0.0 && self.lr_decay <= 1.0,
            Validation,
            "lr decay must be in (0, 1]"
        );
        ensure!(self.lr_period > 0, Validation, "lr period must be positive");
        ensure!(
            self.views > 0,
            Validation,
            "at least one random view is required"
        );
        ensure!(
            self.real_batch > 0,
            Validation,
            "real batch must be positive"
        );
        ensure!(
            self.real_pool_size > 0,
            Validation,
            "real pool must be non-empty"
        );
        ensure!(
            self.view_resolution >= 16 && self.view_resolution.is_power_of_two(),
            Validation,
            "view resolution must be a power of two >= 16"
        );
        self.camera(self.resolutions[0])?;
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.steps_per_stage * self.resolutions.len()
    }

    /// Weights actually used: symmetry terms vanish without the symmetry
    /// prior and the adversarial term without the discriminator.
    pub fn effective_weights(&self) -> LossWeights {
        let mut w = self.weights.clone();
        if !self.enable_sp {
            w.lambda_sv = 0.0;
            w.lambda_isym = 0.0;
        }
        if !self.enable_sd {
            w.lambda_sd = 0.0;
        }
        w
    }

    pub fn sd_active(&self) -> bool {
        self.enable_sd && self.weights.lambda_sd > 0.0
    }

    pub fn camera(&self, image_size: usize) -> Result<Camera> {
        camera_from_angles(
            self.camera_azimuth,
            self.camera_elevation,
            self.camera_distance,
            image_size,
        )
    }
}

/// One executed optimization step. Losses are measured before the update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub step: usize,
    pub resolution: usize,
    pub lr: f64,
    pub l_sp: f64,
    pub l_r: f64,
    pub l_sd: f64,
    pub l_vsym: f64,
    pub l_isym: f64,
    pub total: f64,
    pub disc_loss: Option<f64>,
    pub disc_accuracy: Option<f64>,
    pub elapsed_s: f64,
}

impl FitRecord {
    pub fn report(&self) -> LossReport {
        LossReport {
            l_sp: self.l_sp,
            l_r: self.l_r,
            l_sd: self.l_sd,
            l_vsym: self.l_vsym,
            l_isym: self.l_isym,
            total: self.total,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitHistory {
    pub records: Vec<FitRecord>,
    /// Hard silhouette IoU of the result against the target at target resolution.
    pub final_iou: Option<f64>,
    pub asymmetry: Option<f64>,
    pub wall_time_s: f64,
}

impl FitHistory {
    /// Equality ignoring wall-clock fields.
    pub fn same_trajectory(&self, other: &FitHistory) -> bool {
        let strip = |h: &FitHistory| {
            h.records
                .iter()
                .map(|r| FitRecord {
                    elapsed_s: 0.0,
                    ..r.clone()
                })
                .collect::<Vec<_>>()
        };
        strip(self) == strip(other)
            && self.final_iou.map(f64::to_bits) == other.final_iou.map(f64::to_bits)
            && self.asymmetry.map(f64::to_bits) == other.asymmetry.map(f64::to_bits)
    }
}

/// Result of [`fit`].
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub mesh: Mesh,
    pub history: FitHistory,
}

/// Symmetric spheres, boxes and ellipsoids about `x = 0`, used as the
/// discriminator's reference shapes.
pub fn symmetric_primitive_pool(count: usize, seed: u64) -> Vec<Mesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut size = || rng.gen_range(0.35..0.8);
            match i % 3 {
                0 => primitives::ellipsoid(Vec3::repeat(size()), 2),
                1 => primitives::cuboid(Vec3::new(size(), size(), size())),
                _ => primitives::ellipsoid(Vec3::new(size(), size(), size()), 2),
            }
        })
        .collect()
}

/// Resamples a square power-of-two silhouette to `size`.
pub fn resample(target: &Silhouette, size: usize) -> Result<Silhouette> {
    ensure!(
        target.width == target.height,
        Shape,
        "target must be square"
    );
    if target.width >= size {
        downsample(target, target.width / size)
    } else {
        Ok(target.upsample_nearest(size / target.width))
    }
}

fn check_target(target: &Silhouette) -> Result<()> {
    ensure!(
        target.width == target.height && target.width.is_power_of_two() && target.width >= 8,
        Shape,
        "target must be square with a power-of-two side >= 8, got {}x{}",
        target.width,
        target.height
    );
    ensure!(
        target.values.iter().all(|&v| v == 0.0 || v == 1.0),
        Validation,
        "target silhouette must be binary"
    );
    Ok(())
}

fn render_stack(meshes: &[&Mesh], views: &[Camera], render: &RenderConfig) -> Result<ViewBatch> {
    let stacks = meshes
        .iter()
        .map(|m| {
            views
                .iter()
                .map(|v| soft_silhouette(m, v, render))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ViewBatch::from_stacks(&stacks, Provenance::Real)
}

/// Deforms `template` by per-vertex offsets so that its silhouette at the
/// configured viewpoint matches `target`.
///
/// `real_pool` supplies reference meshes for the discriminator; when `None`
/// a procedural pool of symmetric primitives is used. A non-finite loss
/// aborts with [`Error::Diverged`], which carries the history so far.
pub fn fit(
    target: &Silhouette,
    template: &Mesh,
    cfg: &FitConfig,
    real_pool: Option<&[Mesh]>,
) -> Result<FitOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    check_target(target)?;
    template.validate()?;
    ensure!(!template.is_empty(), Degenerate, "template mesh is empty");
    let adj = adjacency(template)?;
    let weights = cfg.effective_weights();

    let n = template.vertices.len();
    let mut offsets = vec![0.0; 3 * n];
    let mut adam = AdamState::new(3 * n);
    let mut history = FitHistory::default();

    let mut view_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    view_rng.set_stream(1);
    let mut real_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    real_rng.set_stream(2);
    let sd = cfg.sd_active();
    let default_pool;
    let pool: &[Mesh] = match real_pool {
        Some(p) => {
            ensure!(!p.is_empty(), Validation, "real pool is empty");
            p
        }
        None => {
            default_pool = if sd {
                symmetric_primitive_pool(cfg.real_pool_size, cfg.seed ^ 0x5eed_9001)
            } else {
                Vec::new()
            };
            &default_pool
        }
    };
    let mut disc = if sd {
        Some(disc_init(
            cfg.views,
            cfg.view_resolution,
            cfg.seed ^ 0xd15c,
        )?)
    } else {
        None
    };
    let mut disc_adam = disc.as_ref().map(|d| AdamState::new(d.values.len()));

    let mut step = 0;
    for &res in &cfg.resolutions {
        let stage_target = resample(target, res)?;
        let camera = cfg.camera(res)?;
        for _ in 0..cfg.steps_per_stage {
            let lr = lr_at(step, cfg.learning_rate, cfg.lr_decay, cfg.lr_period);
            let views: Vec<Camera> = if weights.lambda_isym > 0.0 || sd {
                let seed = view_rng.gen::<u64>();
                sample_random_views(cfg.views, seed, cfg.view_resolution)?
            } else {
                Vec::new()
            };
            let mesh = apply_offsets(template, &to_vec3(&offsets))?;
            let real = match &disc {
                Some(_) => {
                    let picks: Vec<&Mesh> = (0..cfg.real_batch)
                        .map(|_| &pool[real_rng.gen_range(0..pool.len())])
                        .collect();
                    Some(render_stack(&picks, &views, &cfg.render)?)
                }
                None => None,
            };
            let objective = Objective {
                target: &stage_target,
                camera,
                views: &views,
                plane: cfg.plane,
                weights: &weights,
                render: cfg.render,
                adjacency: &adj,
                adversarial: disc
                    .as_ref()
                    .zip(real.as_ref())
                    .map(|(params, real)| AdversarialTerm { params, real }),
            };
            let eval = match objective.evaluate(&mesh) {
                Ok(e) => e,
                Err(Error::Numeric(_)) => return Err(diverged(step, history, start)),
                Err(e) => return Err(e),
            };
            let grad = flatten(&eval.grad);
            if adam_step(&mut offsets, &grad, &mut adam, lr).is_err() {
                return Err(diverged(step, history, start));
            }
            let mut disc_loss = None;
            let mut disc_accuracy = None;
            // The generator step left the discriminator untouched, so the
            // evaluation's parameter gradient is the discriminator step's.
            if let (Some(params), Some(state), Some(gan)) =
                (disc.as_mut(), disc_adam.as_mut(), eval.gan.as_ref())
            {
                let m = disc_update(params, gan, state, cfg.disc_learning_rate)?;
                disc_loss = Some(m.discriminator_loss);
                disc_accuracy = Some(m.accuracy());
            }
            let r = eval.report;
            history.records.push(FitRecord {
                step,
                resolution: res,
                lr,
                l_sp: r.l_sp,
                l_r: r.l_r,
                l_sd: r.l_sd,
                l_vsym: r.l_vsym,
                l_isym: r.l_isym,
                total: r.total,
                disc_loss,
                disc_accuracy,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            log::debug!("step {step} res {res} lr {lr:.3e} total {:.6}", r.total);
            step += 1;
        }
    }

    let mesh = apply_offsets(template, &to_vec3(&offsets))?;
    let size = target.width;
    let final_render = soft_silhouette(&mesh, &cfg.camera(size)?, &cfg.render)?;
    history.final_iou = Some(final_render.threshold(0.5).hard_iou(target)?);
    history.asymmetry = Some(asymmetry_distance(&mesh, &cfg.plane)?);
    history.wall_time_s = start.elapsed().as_secs_f64();
    Ok(FitOutcome { mesh, history })
}

fn diverged(step: usize, mut history: FitHistory, start: Instant) -> Error {
    history.wall_time_s = start.elapsed().as_secs_f64();
    Error::Diverged {
        step,
        history: Box::new(history),
    }
}

fn to_vec3(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}
