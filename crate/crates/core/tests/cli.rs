use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gwn_orient::io::{load_mesh, save_mesh, MeshFormat};
use gwn_orient::{fixtures, SurfaceMesh};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwn-orient")).args(args).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, mesh: &SurfaceMesh) -> PathBuf {
    let path = dir.path().join(name);
    save_mesh(mesh, &path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ppm_pixel(image: &[u8], r: usize, ix: usize, row: usize) -> [u8; 3] {
    let header = format!("P6\n{r} {r}\n255\n").len();
    let k = header + 3 * (row * r + ix);
    [image[k], image[k + 1], image[k + 2]]
}

#[test]
fn patches_reports_fan_junction() {
    let dir = TempDir::new().unwrap();
    let fan = write(&dir, "fan.obj", &fixtures::triangle_fan(3));
    let report = json_stdout(&run(&["patches", "--input", s(&fan)]));
    assert_eq!(report["n"], 3);
    assert_eq!(report["nonmanifold_edges"].as_array().unwrap().len(), 1);
}

#[test]
fn mobius_strip_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "mobius.obj", &fixtures::mobius_strip(9));
    let out = run(&["orient", "--input", s(&m), "--output", s(&dir.path().join("o.obj"))]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
}

#[test]
fn input_and_argument_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.poly2d");
    assert_eq!(run(&["energy", "--input", s(&missing)]).status.code(), Some(2));
    let junk = dir.path().join("junk.poly2d");
    std::fs::write(&junk, "not a mesh\n").unwrap();
    assert_eq!(run(&["energy", "--input", s(&junk)]).status.code(), Some(2));
    assert_eq!(run(&["orient"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let sq = write(&dir, "sq.poly2d", &fixtures::unit_square());
    assert_eq!(run(&["energy", "--input", s(&sq), "--signs", "1,1"]).status.code(), Some(2));
    assert_eq!(run(&["energy", "--input", s(&sq), "--signs", "2"]).status.code(), Some(2));
    let out = dir.path().join("f.ppm");
    let bad_clamp = run(&["field", "--input", s(&sq), "--output", s(&out), "--clamp-min", "1", "--clamp-max", "0"]);
    assert_eq!(bad_clamp.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn conflicting_and_unconverged_quadrature_exit_with_four() {
    let dir = TempDir::new().unwrap();
    let conflict = fixtures::polylines(&[
        (vec![[0.0, 0.0], [1.0, 0.0]], false),
        (vec![[1.0, 0.0], [2.0, 1.0], [2.0, -1.0], [1.0, 0.0]], false),
    ]);
    let c = write(&dir, "conflict.poly2d", &conflict);
    assert_eq!(run(&["energy", "--input", s(&c)]).status.code(), Some(4));
    let g = write(&dir, "gapped.poly2d", &fixtures::gapped_circle(2, 4, 1.0, 0.2));
    let out = run(&["energy", "--input", s(&g), "--quad-levels", "2", "--quad-tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn energy_reports_single_patch_and_touching_arcs() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.poly2d", &fixtures::unit_square());
    let report = json_stdout(&run(&["energy", "--input", s(&sq)]));
    assert_eq!(report["n"], 1);
    assert_eq!(report["q"], serde_json::json!([[{ "divergent": 1 }]]));
    assert_eq!(report["energy"], 0.0);

    let arcs = write(&dir, "arcs.poly2d", &fixtures::split_circle(2, 4, 1.0));
    let report = json_stdout(&run(&["energy", "--input", s(&arcs)]));
    assert_eq!(report["q"][0][1], serde_json::json!({ "divergent": -1 }));
    assert_eq!(report["divergent_entries"], 1);
    let saved = dir.path().join("report.json");
    let out = run(&["energy", "--input", s(&arcs), "--signs", "1,-1", "--output", s(&saved)]);
    assert!(out.status.success());
    let from_file: Value = serde_json::from_slice(&std::fs::read(saved).unwrap()).unwrap();
    assert!(from_file["energy"].as_f64().unwrap() > 0.0);
}

#[test]
fn orient_repairs_torso_attachments() {
    let dir = TempDir::new().unwrap();
    let torso = write(&dir, "torso.poly2d", &fixtures::torso_with_attachments());
    let out_path = dir.path().join("out.poly2d");
    let report = json_stdout(&run(&["orient", "--input", s(&torso), "--output", s(&out_path)]));
    assert_eq!(report["flipped_patches"], serde_json::json!([2, 3]));
    assert_eq!(report["method"], "brute_force");
    assert!(report["energy_after"].as_f64().unwrap() <= report["energy_before"].as_f64().unwrap());
}

#[test]
fn orient_output_has_reported_energy() {
    let dir = TempDir::new().unwrap();
    let scrambled = fixtures::randomly_flipped(&fixtures::gapped_circle(5, 4, 1.0, 0.2), 11, 0.5);
    let input = write(&dir, "in.poly2d", &scrambled);
    let out_path = dir.path().join("out.poly2d");
    let report = json_stdout(&run(&["orient", "--input", s(&input), "--output", s(&out_path)]));
    let after = report["energy_after"].as_f64().unwrap();
    assert!(after <= report["energy_before"].as_f64().unwrap());
    let again = json_stdout(&run(&["energy", "--input", s(&out_path)]));
    let e = again["energy"].as_f64().unwrap();
    assert!((e - after).abs() <= 1e-9 * after.abs().max(1.0), "{e} vs {after}");
    assert_eq!(load_mesh(&out_path, MeshFormat::Poly2d).unwrap().num_facets(), scrambled.num_facets());
}

#[test]
fn local_solver_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.poly2d", &fixtures::gapped_circle(6, 3, 1.0, 0.2));
    let a = dir.path().join("a.poly2d");
    let b = dir.path().join("b.poly2d");
    let args = |o: &Path| {
        run(&["orient", "--input", s(&input), "--output", s(o), "--solver", "local", "--seed", "9", "--restarts", "5"])
    };
    let ra = json_stdout(&args(&a));
    let rb = json_stdout(&args(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra["method"], "local_search");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn field_image_is_warm_inside_and_cold_outside() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.poly2d", &fixtures::unit_square());
    let img = dir.path().join("sq.ppm");
    let r = 32;
    let base = ["field", "--input", s(&sq), "--output", s(&img), "--resolution", "32", "--margin", "2"];
    let report = json_stdout(&run(&base));
    assert_eq!(report["n"], 1);
    let plain = std::fs::read(&img).unwrap();
    let inside = ppm_pixel(&plain, r, r / 2 + 2, r / 2 - 3);
    let outside = ppm_pixel(&plain, r, 0, 0);
    assert!(inside[0] > inside[2], "{inside:?}");
    assert!(outside[2] > outside[0], "{outside:?}");

    let mut flipped_args = base.to_vec();
    flipped_args.extend(["--signs", "-1", "--clamp-min", "-1.25", "--clamp-max", "0.25"]);
    json_stdout(&run(&flipped_args));
    let flipped = std::fs::read(&img).unwrap();
    let flipped_inside = ppm_pixel(&flipped, r, r / 2 + 2, r / 2 - 3);
    assert!(flipped_inside[2] > flipped_inside[0], "{flipped_inside:?}");
}

#[test]
fn field_on_3d_mesh_needs_json_output() {
    let dir = TempDir::new().unwrap();
    let cube = write(&dir, "cube.obj", &fixtures::unit_cube());
    let ppm = dir.path().join("cube.ppm");
    assert_eq!(run(&["field", "--input", s(&cube), "--output", s(&ppm)]).status.code(), Some(2));
    let grid_path = dir.path().join("cube.json");
    json_stdout(&run(&["field", "--input", s(&cube), "--output", s(&grid_path), "--resolution", "6"]));
    let grid: Value = serde_json::from_slice(&std::fs::read(grid_path).unwrap()).unwrap();
    assert_eq!(grid["counts"], serde_json::json!([6, 6, 6]));
    assert_eq!(grid["values"].as_array().unwrap().len(), 216);
}
