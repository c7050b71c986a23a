use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{ensure, Error, Result};
use crate::optim::FitHistory;

pub const SUMMARY_HEADER: &str = "final_iou,asymmetry,wall_time_s,steps";

/// One JSON object per step; keys follow the field order of `FitRecord`.
pub fn history_jsonl(history: &FitHistory) -> String {
    let mut out = String::new();
    for r in &history.records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn summary_csv(history: &FitHistory) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::new();
    writeln!(out, "{SUMMARY_HEADER}").unwrap();
    writeln!(
        out,
        "{},{},{},{}",
        opt(history.final_iou),
        opt(history.asymmetry),
        history.wall_time_s,
        history.records.len()
    )
    .unwrap();
    out
}

/// Writes the JSON-lines history to `path` and the summary CSV next to it
/// (same stem, `.csv` extension). Returns the summary path.
pub fn write_report(history: &FitHistory, path: &Path) -> Result<PathBuf> {
    ensure!(!history.records.is_empty(), Validation, "history is empty");
    fs::write(path, history_jsonl(history)).map_err(|e| Error::io(path, e))?;
    let summary = path.with_extension("csv");
    fs::write(&summary, summary_csv(history)).map_err(|e| Error::io(&summary, e))?;
    Ok(summary)
}
