//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{ensure, Error, Result};
use crate::geometry::{icosphere, voxel_iou, Mesh};
use crate::io::{
    load_config, load_obj, load_sketch, save_gray, save_obj, save_sketch, synth_sketch,
    write_report, GrayImage, SketchMode,
};
use crate::optim::ablation::{
    run_ablation, stretch_positive_x, toy_suite, SuiteItem, TABLE_SETTINGS,
};
use crate::optim::{fit, FitConfig, GradcheckFixture, Term};
use crate::render::{camera_from_angles, soft_silhouette, RenderConfig, DEFAULT_DISTANCE};

/// Largest relative gradient error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "sketchmesh",
    version,
    about = "Single-sketch 3D modeling by template deformation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a template mesh to a sketch.
    Fit(FitArgs),
    /// Render a mesh's soft silhouette to an image.
    Render(RenderArgs),
    /// Compare analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Print the voxel IoU between two meshes.
    Eval(EvalArgs),
    /// Synthesize a sketch from a mesh.
    Synth(SynthArgs),
    /// Run the SD/SP on-off grid over a suite of meshes.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// 8-bit grayscale PNG or PGM sketch.
    sketch: PathBuf,
    /// Template OBJ; defaults to a level-2 icosphere.
    #[arg(long)]
    template: Option<PathBuf>,
    /// key = value run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// JSONL history; a summary CSV is written next to it.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    obj: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    az: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    el: f64,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, default_value_t = DEFAULT_DISTANCE)]
    distance: f64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    /// all, iou, sp, vsym, isym, lap, flat, sd or full.
    #[arg(long, default_value = "all")]
    term: String,
    /// Finite-difference step; each term's default when omitted.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = 32)]
    res: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// silhouette or edge.
    #[arg(long, default_value = "silhouette")]
    mode: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    az: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    el: f64,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AblateArgs {
    /// Directory of reference OBJ meshes, processed in file-name order.
    #[arg(long)]
    suite: PathBuf,
    /// Write the built-in toy suite into the directory first.
    #[arg(long)]
    generate: bool,
    /// Stretch each reference's `x > 0` half by this factor before fitting.
    #[arg(long)]
    stretch: Option<f64>,
    /// Run configuration; the toy configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    template: Option<PathBuf>,
    /// Voxel resolution of the 3D IoU column values.
    #[arg(long, default_value_t = 32)]
    voxel_res: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on usage or validation errors, 2 on
/// numeric failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Fit(a) => run_fit(a),
        Command::Render(a) => run_render(a),
        Command::Gradcheck(a) => run_gradcheck(a),
        Command::Eval(a) => {
            let iou = voxel_iou(&load_obj(&a.pred)?, &load_obj(&a.gt)?, a.res)?;
            println!("{iou:.4}");
            Ok(0)
        }
        Command::Synth(a) => {
            let mode: SketchMode = a.mode.parse()?;
            let cam = camera_from_angles(a.az, a.el, DEFAULT_DISTANCE, a.res)?;
            let sketch = synth_sketch(&load_obj(&a.mesh)?, &cam, mode, &RenderConfig::default())?;
            save_sketch(&sketch, &a.out)?;
            Ok(0)
        }
        Command::Ablate(a) => run_ablate(a),
    }
}

fn template_or_default(path: Option<&Path>) -> Result<Mesh> {
    match path {
        Some(p) => load_obj(p),
        None => icosphere(2),
    }
}

fn run_fit(a: FitArgs) -> Result<i32> {
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => FitConfig::default(),
    };
    let template = template_or_default(a.template.as_deref())?;
    let loaded = load_sketch(&a.sketch)?;
    let outcome = match fit(&loaded.target, &template, &cfg, None) {
        Ok(o) => o,
        Err(Error::Diverged { step, history }) => {
            if let Some(h) = &a.history {
                if !history.records.is_empty() {
                    write_report(&history, h)?;
                }
            }
            return Err(Error::Diverged { step, history });
        }
        Err(e) => return Err(e),
    };
    save_obj(&outcome.mesh, &a.out)?;
    if let Some(h) = &a.history {
        write_report(&outcome.history, h)?;
    }
    let hist = &outcome.history;
    println!(
        "steps {} iou {} asymmetry {} time {:.2}s",
        hist.records.len(),
        hist.final_iou.map_or("n/a".into(), |v| format!("{v:.4}")),
        hist.asymmetry.map_or("n/a".into(), |v| format!("{v:.3e}")),
        hist.wall_time_s
    );
    Ok(0)
}

fn run_render(a: RenderArgs) -> Result<i32> {
    let mut render = RenderConfig::default();
    if let Some(s) = a.sigma {
        render.sigma = s;
    }
    let cam = camera_from_angles(a.az, a.el, a.distance, a.res)?;
    let sil = soft_silhouette(&load_obj(&a.obj)?, &cam, &render)?;
    save_gray(&GrayImage::from_silhouette(&sil), &a.out)?;
    Ok(0)
}

fn run_gradcheck(a: GradcheckArgs) -> Result<i32> {
    let terms: Vec<Term> = if a.term == "all" {
        Term::ALL.to_vec()
    } else {
        vec![a.term.parse()?]
    };
    if let Some(h) = a.step {
        ensure!(
            h > 0.0 && h.is_finite(),
            Validation,
            "step must be positive, got {h}"
        );
    }
    let fixture = GradcheckFixture::new()?;
    let mut failed = false;
    println!("term\tmax_rel_error\tworst\tnon_smooth");
    for term in terms {
        let report = fixture.check(term, a.step.unwrap_or(term.default_step()))?;
        let ok = report.passes(GRADCHECK_TOLERANCE);
        failed |= !ok;
        println!(
            "{term}\t{:.3e}\t{}\t{}{}",
            report.max_rel_error,
            report.worst.map_or("-".into(), |i| i.to_string()),
            report.non_smooth.len(),
            if ok { "" } else { "\tFAIL" }
        );
    }
    Ok(if failed { 2 } else { 0 })
}

fn load_suite(dir: &Path) -> Result<Vec<SuiteItem>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "obj") {
            paths.push(path);
        }
    }
    paths.sort();
    ensure!(
        !paths.is_empty(),
        Validation,
        "{}: no .obj meshes found",
        dir.display()
    );
    paths
        .into_iter()
        .map(|p| {
            Ok(SuiteItem {
                name: p
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned(),
                mesh: load_obj(&p)?,
            })
        })
        .collect()
}

fn run_ablate(a: AblateArgs) -> Result<i32> {
    if a.generate {
        fs::create_dir_all(&a.suite).map_err(|e| Error::io(&a.suite, e))?;
        for (i, item) in toy_suite().iter().enumerate() {
            save_obj(
                &item.mesh,
                &a.suite.join(format!("{i:02}_{}.obj", item.name)),
            )?;
        }
    }
    let mut suite = load_suite(&a.suite)?;
    if let Some(f) = a.stretch {
        ensure!(
            f > 0.0 && f.is_finite(),
            Validation,
            "stretch must be positive, got {f}"
        );
        for item in &mut suite {
            item.mesh = stretch_positive_x(&item.mesh, f);
        }
    }
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => FitConfig::toy(),
    };
    let template = template_or_default(a.template.as_deref())?;
    let table = run_ablation(&suite, &TABLE_SETTINGS, &cfg, &template, Some(a.voxel_res))?;
    let csv = table.to_csv();
    match &a.out {
        Some(p) => fs::write(p, &csv).map_err(|e| Error::io(p, e))?,
        None => print!("{csv}"),
    }
    Ok(0)
}
