//! Flat `key = value` run configuration. Blank lines and `#` comments are
//! ignored, lists are comma-separated, missing keys keep their defaults and
//! unknown or repeated keys are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{SymmetryPlane, Vec3};
use crate::optim::FitConfig;

/// Every recognised key, in serialization order.
pub const CONFIG_KEYS: [&str; 26] = [
    "resolutions",
    "steps_per_stage",
    "learning_rate",
    "lr_decay",
    "lr_period",
    "seed",
    "enable_sd",
    "enable_sp",
    "scale_weights",
    "lambda_sd",
    "lambda_sv",
    "lambda_isym",
    "laplacian_weight",
    "flatten_weight",
    "sigma",
    "background",
    "plane_normal",
    "plane_offset",
    "camera_azimuth",
    "camera_elevation",
    "camera_distance",
    "views",
    "view_resolution",
    "disc_learning_rate",
    "real_pool_size",
    "real_batch",
];

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes every key; floats use the shortest representation that parses back
/// to the same value.
pub fn config_string(cfg: &FitConfig) -> String {
    let n = cfg.plane.normal();
    let w = &cfg.weights;
    let values: [String; 26] = [
        join(&cfg.resolutions),
        cfg.steps_per_stage.to_string(),
        cfg.learning_rate.to_string(),
        cfg.lr_decay.to_string(),
        cfg.lr_period.to_string(),
        cfg.seed.to_string(),
        cfg.enable_sd.to_string(),
        cfg.enable_sp.to_string(),
        join(&w.scale_weights),
        w.lambda_sd.to_string(),
        w.lambda_sv.to_string(),
        w.lambda_isym.to_string(),
        w.laplacian.to_string(),
        w.flatten.to_string(),
        cfg.render.sigma.to_string(),
        cfg.render.background.to_string(),
        join(&[n.x, n.y, n.z]),
        cfg.plane.offset().to_string(),
        cfg.camera_azimuth.to_string(),
        cfg.camera_elevation.to_string(),
        cfg.camera_distance.to_string(),
        cfg.views.to_string(),
        cfg.view_resolution.to_string(),
        cfg.disc_learning_rate.to_string(),
        cfg.real_pool_size.to_string(),
        cfg.real_batch.to_string(),
    ];
    let mut out = String::new();
    for (k, v) in CONFIG_KEYS.iter().zip(values) {
        writeln!(out, "{k} = {v}").unwrap();
    }
    out
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Validation(format!("{key}: cannot parse {value:?}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|t| scalar(key, t.trim())).collect()
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<FitConfig> {
    let mut cfg = FitConfig::default();
    let mut seen = BTreeSet::new();
    let mut normal: Option<Vec3> = None;
    let mut offset: Option<f64> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Validation(format!("line {}: expected key = value", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::Validation(format!(
                "line {}: duplicate key {key}",
                lineno + 1
            )));
        }
        let w = &mut cfg.weights;
        match key {
            "resolutions" => cfg.resolutions = list(key, value)?,
            "steps_per_stage" => cfg.steps_per_stage = scalar(key, value)?,
            "learning_rate" => cfg.learning_rate = scalar(key, value)?,
            "lr_decay" => cfg.lr_decay = scalar(key, value)?,
            "lr_period" => cfg.lr_period = scalar(key, value)?,
            "seed" => cfg.seed = scalar(key, value)?,
            "enable_sd" => cfg.enable_sd = scalar(key, value)?,
            "enable_sp" => cfg.enable_sp = scalar(key, value)?,
            "scale_weights" => w.scale_weights = list(key, value)?,
            "lambda_sd" => w.lambda_sd = scalar(key, value)?,
            "lambda_sv" => w.lambda_sv = scalar(key, value)?,
            "lambda_isym" => w.lambda_isym = scalar(key, value)?,
            "laplacian_weight" => w.laplacian = scalar(key, value)?,
            "flatten_weight" => w.flatten = scalar(key, value)?,
            "sigma" => cfg.render.sigma = scalar(key, value)?,
            "background" => cfg.render.background = scalar(key, value)?,
            "plane_normal" => {
                let v: Vec<f64> = list(key, value)?;
                if v.len() != 3 {
                    return Err(Error::Validation(format!(
                        "plane_normal needs 3 components, got {}",
                        v.len()
                    )));
                }
                normal = Some(Vec3::new(v[0], v[1], v[2]));
            }
            "plane_offset" => offset = Some(scalar(key, value)?),
            "camera_azimuth" => cfg.camera_azimuth = scalar(key, value)?,
            "camera_elevation" => cfg.camera_elevation = scalar(key, value)?,
            "camera_distance" => cfg.camera_distance = scalar(key, value)?,
            "views" => cfg.views = scalar(key, value)?,
            "view_resolution" => cfg.view_resolution = scalar(key, value)?,
            "disc_learning_rate" => cfg.disc_learning_rate = scalar(key, value)?,
            "real_pool_size" => cfg.real_pool_size = scalar(key, value)?,
            "real_batch" => cfg.real_batch = scalar(key, value)?,
            other => {
                return Err(Error::Validation(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }
    if normal.is_some() || offset.is_some() {
        cfg.plane = SymmetryPlane::new(
            normal.unwrap_or_else(|| cfg.plane.normal()),
            offset.unwrap_or_else(|| cfg.plane.offset()),
        )?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<FitConfig> {
    parse_config(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn save_config(cfg: &FitConfig, path: &Path) -> Result<()> {
    fs::write(path, config_string(cfg)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trip() {
        let cfg = FitConfig::default();
        let text = config_string(&cfg);
        assert_eq!(text.lines().count(), CONFIG_KEYS.len());
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(parse_config("# nothing\n\n").unwrap(), FitConfig::default());
    }

    #[test]
    fn partial_document_overrides() {
        let cfg =
            parse_config("seed = 9\nresolutions = 16, 32 # two stages\nenable_sd=false\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.resolutions, vec![16, 32]);
        assert!(!cfg.enable_sd);
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            "colour = red",
            "seed = 1\nseed = 2",
            "seed",
            "learning_rate = fast",
            "resolutions = 64, 32",
            "resolutions = 48",
            "plane_normal = 1, 1, 0",
            "plane_normal = 1, 0",
            "enable_sp = yes",
            "lambda_sd = -1",
        ] {
            assert!(
                matches!(parse_config(text), Err(Error::Validation(_))),
                "{text}"
            );
        }
    }
}
