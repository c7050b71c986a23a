//! File formats: OBJ meshes, grayscale images and sketches, run
//! configurations and fit reports.

mod config;
mod image;
mod obj;
mod report;
mod sketch;

pub use self::image::{load_gray, save_gray, GrayImage};
pub use config::{config_string, load_config, parse_config, save_config, CONFIG_KEYS};
pub use obj::{load_obj, obj_string, parse_obj, save_obj};
pub use report::{history_jsonl, summary_csv, write_report, SUMMARY_HEADER};
pub use sketch::{
    fill_sketch, load_sketch, save_sketch, synth_sketch, LoadedSketch, SketchImage, SketchMode,
};
