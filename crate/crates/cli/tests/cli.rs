//! Command-line contract: exit codes, written files and their formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use marlow_core::fixtures::periodic_texture;
use marlow_core::{load_image, load_mask, save_image};

fn marlow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marlow")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small texture on disk plus its degraded copy and mask.
fn prepared(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let truth = dir.join("truth.png");
    save_image(&periodic_texture(32), &truth).unwrap();
    let work = dir.join("deg");
    let out = marlow(&["degrade", s(&truth), "--rate", "0.7", "--seed", "3", "-o", s(&work)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (truth, work.join("degraded.png"), work.join("mask.png"))
}

#[test]
fn degrade_writes_image_mask_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, degraded, mask) = prepared(dir.path());
    let mask = load_mask(&mask).unwrap();
    assert_eq!(mask.missing_count(), (0.7f64 * 1024.0).round() as usize);
    let degraded = load_image(&degraded).unwrap();
    let truth = load_image(&truth).unwrap();
    for r in 0..32 {
        for c in 0..32 {
            let want = if mask.is_known(r, c) { truth.get(r, c, 0) } else { 0.0 };
            assert_eq!(degraded.get(r, c, 0), want);
        }
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("deg/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "degrade");
    assert_eq!(manifest["spec"]["mode"], "random");
    assert_eq!(manifest["spec"]["seed"], 3);
}

#[test]
fn grid_degradation_keeps_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("t.png");
    save_image(&periodic_texture(16), &truth).unwrap();
    let out = marlow(&["degrade", s(&truth), "--grid", "2", "-o", s(&dir.path().join("g"))]);
    assert!(out.status.success());
    let mask = load_mask(dir.path().join("g/mask.png")).unwrap();
    assert_eq!(mask.known_count(), 64);
    assert!(mask.is_known(2, 4) && !mask.is_known(1, 4));
}

#[test]
fn complete_writes_metrics_with_fixed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, degraded, mask) = prepared(dir.path());
    let output = dir.path().join("out/restored.png");
    let out = marlow(&[
        "complete", s(&degraded), s(&mask), "-o", s(&output), "--reference", s(&truth), "--iters", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(output.is_file());

    let text = std::fs::read_to_string(dir.path().join("out/restored.metrics.json")).unwrap();
    let psnr_field = text.lines().find(|l| l.contains("\"psnr_db\"")).unwrap();
    let number = psnr_field.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    assert_eq!(number.split('.').nth(1).unwrap().len(), 2, "{psnr_field}");
    let ssim_field = text.lines().find(|l| l.contains("\"ssim\"")).unwrap();
    let number = ssim_field.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    assert_eq!(number.split('.').nth(1).unwrap().len(), 4, "{ssim_field}");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/restored.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "complete");
    assert_eq!(manifest["config"]["max_iter"], 1);
    assert_eq!(manifest["trace"]["iterations"].as_array().unwrap().len(), 1);
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let (_, degraded, mask) = prepared(dir.path());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# quick run\nmode = lowrank-only\niters = 2\nmu = 5\n").unwrap();
    let output = dir.path().join("r.png");
    let out = marlow(&["complete", s(&degraded), s(&mask), "-o", s(&output), "--config", s(&cfg), "--iters", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["mode"], "lowrank_only");
    assert_eq!(manifest["config"]["max_iter"], 1);
    assert_eq!(manifest["config"]["mu"], 5.0);
}

#[test]
fn replay_reproduces_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, degraded, mask) = prepared(dir.path());
    let first = dir.path().join("a.png");
    assert!(marlow(&["complete", s(&degraded), s(&mask), "-o", s(&first), "--iters", "1"]).status.success());
    let second = dir.path().join("b.png");
    let out = marlow(&["replay", s(&dir.path().join("a.manifest.json")), "-o", s(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
}

#[test]
fn evaluate_prints_json_and_handles_identical_images() {
    let dir = tempfile::tempdir().unwrap();
    let (truth, degraded, _) = prepared(dir.path());
    let out = marlow(&["evaluate", s(&truth), s(&truth)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"psnr_db":"inf","ssim":1.0000}"#);

    let out = marlow(&["evaluate", s(&degraded), s(&truth)]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["psnr_db"].as_f64().unwrap() < 20.0);
}

#[test]
fn evaluate_directories_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    for name in ["x.png", "y.png"] {
        save_image(&periodic_texture(16), a.join(name)).unwrap();
        save_image(&periodic_texture(16), b.join(name)).unwrap();
    }
    let out = marlow(&["evaluate", s(&a), s(&b)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["image,psnr_db,ssim", "x.png,inf,1.0000", "y.png,inf,1.0000"]);
}

#[test]
fn bench_tabulates_directory() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("imgs");
    std::fs::create_dir_all(&images).unwrap();
    save_image(&periodic_texture(32), images.join("house.png")).unwrap();
    let out_dir = dir.path().join("bench");
    let out = marlow(&["bench", s(&images), "--iters", "1", "-o", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.contains("house"));
    assert!(table.contains("34.70"));
    assert!(out_dir.join("manifest.json").is_file());
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.png");
    assert!(!marlow(&["evaluate", s(&missing), s(&missing)]).status.success());
    assert!(!marlow(&["degrade", s(&missing), "-o", s(dir.path())]).status.success());

    let (_, degraded, _) = prepared(dir.path());
    let small = dir.path().join("small.png");
    save_image(&periodic_texture(16), &small).unwrap();
    let out = marlow(&["complete", s(&degraded), s(&small), "-o", s(&dir.path().join("x.png"))]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    assert!(!marlow(&["complete", s(&degraded), s(&degraded), "-o", "x.png", "--mode", "bogus"]).status.success());
}
