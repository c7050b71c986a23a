use std::path::Path;

use proptest::prelude::*;

use sketchmesh::geometry::{icosphere, primitives, Vec3};
use sketchmesh::io::{
    config_string, fill_sketch, history_jsonl, load_gray, load_obj, load_sketch, parse_config,
    parse_obj, save_gray, save_obj, summary_csv, synth_sketch, write_report, GrayImage, SketchMode,
    SUMMARY_HEADER,
};
use sketchmesh::optim::{fit, FitConfig, FitHistory};
use sketchmesh::render::{camera_from_angles, RenderConfig, DEFAULT_DISTANCE};
use sketchmesh::Error;

fn write_gray(path: &Path, w: usize, h: usize, f: impl Fn(usize, usize) -> u8) {
    let pixels = (0..w * h).map(|i| f(i / w, i % w)).collect();
    save_gray(
        &GrayImage {
            width: w,
            height: h,
            pixels,
        },
        path,
    )
    .unwrap();
}

#[test]
fn white_sketch_has_empty_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("white.png");
    write_gray(&path, 32, 32, |_, _| 255);
    let loaded = load_sketch(&path).unwrap();
    assert_eq!(loaded.sketch.stroke_count(), 0);
    assert_eq!(loaded.target.sum(), 0.0);
}

#[test]
fn filled_disk_keeps_its_pixel_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.pgm");
    write_gray(&path, 64, 64, |r, c| {
        let (y, x) = (r as f64 - 31.5, c as f64 - 20.5);
        if x * x + y * y < 15.0 * 15.0 {
            0
        } else {
            255
        }
    });
    let loaded = load_sketch(&path).unwrap();
    assert_eq!(loaded.target.sum() as usize, loaded.sketch.stroke_count());
}

#[test]
fn sixteen_bit_and_colour_images_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let deep = dir.path().join("deep.png");
    image::ImageBuffer::<image::Luma<u16>, _>::from_pixel(8, 8, image::Luma([40000u16]))
        .save(&deep)
        .unwrap();
    assert!(matches!(load_sketch(&deep), Err(Error::Format(_))));
    let rgb = dir.path().join("rgb.png");
    image::RgbImage::from_pixel(8, 8, image::Rgb([0, 0, 0]))
        .save(&rgb)
        .unwrap();
    assert!(matches!(load_gray(&rgb), Err(Error::Format(_))));
    assert!(matches!(
        load_gray(&dir.path().join("missing.png")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn sphere_sketch_matches_analytic_disk_area() {
    let (size, d) = (128, DEFAULT_DISTANCE);
    let cam = camera_from_angles(0.0, 0.0, d, size).unwrap();
    let sketch = synth_sketch(
        &icosphere(4).unwrap(),
        &cam,
        SketchMode::Silhouette,
        // The default softness grows the 0.5 level set by about 2% in radius.
        &RenderConfig {
            sigma: 1e-6,
            ..RenderConfig::default()
        },
    )
    .unwrap();
    // The silhouette cone of a unit sphere has half-angle asin(1 / d).
    let radius_ndc = (1.0 / d).asin().tan() / (cam.fov.to_radians() / 2.0).tan();
    let radius_px = radius_ndc * size as f64 / 2.0;
    let expected = std::f64::consts::PI * radius_px * radius_px;
    let got = sketch.stroke_count() as f64;
    assert!((got / expected - 1.0).abs() < 0.03, "{got} vs {expected}");
}

#[test]
fn edge_sketch_is_a_thin_closed_ring() {
    let cam = camera_from_angles(20.0, 10.0, DEFAULT_DISTANCE, 64).unwrap();
    let cfg = RenderConfig::default();
    let mesh = primitives::ellipsoid(Vec3::new(0.8, 0.5, 0.6), 3);
    let solid = synth_sketch(&mesh, &cam, SketchMode::Silhouette, &cfg).unwrap();
    let edge = synth_sketch(&mesh, &cam, SketchMode::Edge, &cfg).unwrap();
    let (w, h) = (edge.width, edge.height);
    let at = |r: isize, c: isize| {
        r >= 0
            && c >= 0
            && (r as usize) < h
            && (c as usize) < w
            && solid.values[r as usize * w + c as usize] == 0
    };
    for r in 0..h as isize {
        for c in 0..w as isize {
            let interior = (-1..=1).all(|dr| (-1..=1).all(|dc| at(r + dr, c + dc)));
            let stroke = edge.values[r as usize * w + c as usize] == 0;
            assert_eq!(stroke, at(r, c) && !interior, "pixel ({r}, {c})");
        }
    }
    assert!(edge.stroke_count() < solid.stroke_count() / 3);
    let (filled, enclosed) = fill_sketch(&edge);
    assert!(enclosed);
    assert_eq!(filled, fill_sketch(&solid).0);
}

#[test]
fn obj_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ico.obj");
    let mesh = icosphere(1).unwrap();
    save_obj(&mesh, &path).unwrap();
    let back = load_obj(&path).unwrap();
    assert_eq!((back.vertices.len(), back.faces.len()), (42, 80));
    assert_eq!(back.faces, mesh.faces);

    let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
    assert!(matches!(parse_obj(quad), Err(Error::Format(_))));
    let relative = "v 0 0 0\nv 1 0 0\nv 1 1 0\nf -3 -2 -1\n";
    assert!(matches!(parse_obj(relative), Err(Error::Format(_))));
    let out_of_range = "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 4\n";
    assert!(matches!(parse_obj(out_of_range), Err(Error::Format(_))));
}

fn short_history(seed: u64) -> FitHistory {
    let cfg = FitConfig {
        resolutions: vec![16],
        steps_per_stage: 500,
        enable_sd: false,
        view_resolution: 16,
        seed,
        ..FitConfig::toy()
    };
    let cam = cfg.camera(16).unwrap();
    let target = sketchmesh::render::soft_silhouette(&primitives::cube(1.0), &cam, &cfg.render)
        .unwrap()
        .threshold(0.5);
    fit(&target, &icosphere(1).unwrap(), &cfg, None)
        .unwrap()
        .history
}

fn without_elapsed(jsonl: &str) -> Vec<serde_json::Value> {
    jsonl
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("elapsed_s");
            v
        })
        .collect()
}

#[test]
fn report_files_for_a_500_step_run() {
    let history = short_history(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let csv_path = write_report(&history, &path).unwrap();
    assert_eq!(csv_path, dir.path().join("run.csv"));

    let jsonl = std::fs::read_to_string(&path).unwrap();
    assert_eq!(jsonl.lines().count(), 500);
    let first = jsonl.lines().next().unwrap();
    let keys = [
        "step",
        "resolution",
        "lr",
        "l_sp",
        "l_r",
        "l_sd",
        "l_vsym",
        "l_isym",
        "total",
        "disc_loss",
        "disc_accuracy",
        "elapsed_s",
    ];
    let mut at = 0;
    for k in keys {
        let pos = first[at..].find(&format!("\"{k}\":")).expect(k) + at;
        at = pos + 1;
    }

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv, summary_csv(&history));
    assert_eq!(csv.lines().next().unwrap(), SUMMARY_HEADER);
    assert_eq!(SUMMARY_HEADER, "final_iou,asymmetry,wall_time_s,steps");

    let again = short_history(3);
    assert_eq!(
        without_elapsed(&history_jsonl(&history)),
        without_elapsed(&history_jsonl(&again))
    );
}

#[test]
fn empty_history_is_not_reported() {
    let dir = tempfile::tempdir().unwrap();
    let err = write_report(&FitHistory::default(), &dir.path().join("h.jsonl"));
    assert!(matches!(err, Err(Error::Validation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip_is_idempotent(
        lr in 0.0..1.0f64,
        steps in 0usize..10_000,
        seed in any::<u64>(),
        sigma in 1e-7..1e-1f64,
        sd in any::<bool>(),
        az in -720.0..720.0f64,
        weights in prop::collection::vec(0.0..10.0f64, 1..4),
    ) {
        let mut cfg = FitConfig {
            learning_rate: lr,
            steps_per_stage: steps,
            seed,
            enable_sd: sd,
            camera_azimuth: az,
            ..FitConfig::default()
        };
        cfg.render.sigma = sigma;
        cfg.weights.scale_weights = weights;
        let text = config_string(&cfg);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(config_string(&back), text);
    }

    #[test]
    fn obj_round_trip_within_tolerance(
        coords in prop::collection::vec(-100.0..100.0f64, 9..60),
    ) {
        let n = coords.len() / 3;
        let vertices: Vec<Vec3> = (0..n).map(|i| Vec3::new(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2])).collect();
        let faces = (0..n - 2).map(|i| [i, i + 1, i + 2]).collect();
        let mesh = sketchmesh::Mesh::new(vertices, faces).unwrap();
        let back = parse_obj(&sketchmesh::io::obj_string(&mesh)).unwrap();
        prop_assert_eq!(&back.faces, &mesh.faces);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            prop_assert!((a - b).amax() <= 1e-6);
        }
    }
}
