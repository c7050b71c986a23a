//! The SD/SP on-off grid over a suite of reference meshes.

use std::fmt::Write as _;

use super::{fit, FitConfig};
use crate::error::{ensure, Result};
use crate::geometry::{primitives, voxel_iou, Mesh, Vec3};
use crate::render::{soft_silhouette, Silhouette};

/// A reference mesh in an ablation suite.
#[derive(Debug, Clone)]
pub struct SuiteItem {
    pub name: String,
    pub mesh: Mesh,
}

/// Five symmetric primitives about `x = 0`.
pub fn toy_suite() -> Vec<SuiteItem> {
    let item = |name: &str, mesh: Mesh| SuiteItem {
        name: name.to_string(),
        mesh,
    };
    vec![
        item("cube", primitives::cube(1.0)),
        item(
            "wide_ellipsoid",
            primitives::ellipsoid(Vec3::new(0.7, 0.5, 0.5), 3),
        ),
        item("slab", primitives::cuboid(Vec3::new(0.6, 0.35, 0.4))),
        item("sphere", primitives::ellipsoid(Vec3::repeat(0.6), 3)),
        item(
            "tall_ellipsoid",
            primitives::ellipsoid(Vec3::new(0.4, 0.7, 0.45), 3),
        ),
    ]
}

/// Stretches the `x > 0` half by `factor`, breaking the `x = 0` symmetry.
pub fn stretch_positive_x(mesh: &Mesh, factor: f64) -> Mesh {
    mesh.map_vertices(|v| {
        if v.x > 0.0 {
            Vec3::new(v.x * factor, v.y, v.z)
        } else {
            *v
        }
    })
}

/// Hard silhouette of `mesh` at the configured viewpoint and final stage resolution.
pub fn target_silhouette(mesh: &Mesh, cfg: &FitConfig) -> Result<Silhouette> {
    let res = *cfg
        .resolutions
        .last()
        .expect("validated config has a stage");
    Ok(soft_silhouette(mesh, &cfg.camera(res)?, &cfg.render)?.threshold(0.5))
}

/// A row of the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Setting {
    pub label: &'static str,
    pub sd: bool,
    pub sp: bool,
}

/// Baseline, +SD and +SD+SP, in table order.
pub const TABLE_SETTINGS: [Setting; 3] = [
    Setting {
        label: "baseline",
        sd: false,
        sp: false,
    },
    Setting {
        label: "+SD",
        sd: true,
        sp: false,
    },
    Setting {
        label: "+SD+SP",
        sd: true,
        sp: true,
    },
];

/// Outcome of one fit in the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub silhouette_iou: f64,
    /// Present when a voxel resolution was requested.
    pub voxel_iou: Option<f64>,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub setting: Setting,
    pub cells: Vec<Cell>,
}

impl AblationRow {
    pub fn mean(&self, metric: impl Fn(&Cell) -> f64) -> f64 {
        self.cells.iter().map(metric).sum::<f64>() / self.cells.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub names: Vec<String>,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// One row per setting with SD/SP marks, a column per target and the
    /// mean. Cells hold voxel IoU when available, else silhouette IoU.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write!(out, "setting,SD,SP").unwrap();
        for n in &self.names {
            write!(out, ",{n}").unwrap();
        }
        writeln!(out, ",mean").unwrap();
        let value = |c: &Cell| c.voxel_iou.unwrap_or(c.silhouette_iou);
        for row in &self.rows {
            let mark = |on: bool| if on { "x" } else { "" };
            write!(
                out,
                "{},{},{}",
                row.setting.label,
                mark(row.setting.sd),
                mark(row.setting.sp)
            )
            .unwrap();
            for c in &row.cells {
                write!(out, ",{:.4}", value(c)).unwrap();
            }
            writeln!(out, ",{:.4}", row.mean(value)).unwrap();
        }
        out
    }
}

/// Fits `template` to the canonical silhouette of every suite mesh under
/// each setting. `voxel_resolution` enables the 3D metric against the
/// reference mesh.
pub fn run_ablation(
    suite: &[SuiteItem],
    settings: &[Setting],
    base: &FitConfig,
    template: &Mesh,
    voxel_resolution: Option<usize>,
) -> Result<AblationTable> {
    ensure!(!suite.is_empty(), Validation, "ablation suite is empty");
    base.validate()?;
    let targets = suite
        .iter()
        .map(|s| target_silhouette(&s.mesh, base))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(settings.len());
    for &setting in settings {
        let cfg = FitConfig {
            enable_sd: setting.sd,
            enable_sp: setting.sp,
            ..base.clone()
        };
        let mut cells = Vec::with_capacity(suite.len());
        for (item, target) in suite.iter().zip(&targets) {
            let out = fit(target, template, &cfg, None)?;
            let voxel = match voxel_resolution {
                Some(r) => Some(voxel_iou(&out.mesh, &item.mesh, r)?),
                None => None,
            };
            log::info!(
                "{} {}: iou {:?}",
                setting.label,
                item.name,
                out.history.final_iou
            );
            cells.push(Cell {
                silhouette_iou: out.history.final_iou.unwrap_or(0.0),
                voxel_iou: voxel,
                asymmetry: out.history.asymmetry.unwrap_or(f64::NAN),
            });
        }
        rows.push(AblationRow { setting, cells });
    }
    Ok(AblationTable {
        names: suite.iter().map(|s| s.name.clone()).collect(),
        rows,
    })
}
