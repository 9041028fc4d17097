//! Helpers shared by the CLI test targets: on-disk fixtures and a runner
//! for the built binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bakesynth::dataset::io::{save_mask, save_png, write_crop, CropManifest};
use bakesynth::{fixtures, BinaryMask};
use image::{Rgb, RgbImage};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `bakesynth` binary with `BAKESYNTH_SEED` cleared unless given.
pub fn bakesynth(args: &[&str], env_seed: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bakesynth"));
    cmd.args(args)
        .env_remove("BAKESYNTH_SEED")
        .env("RUST_LOG", "warn");
    if let Some(s) = env_seed {
        cmd.env("BAKESYNTH_SEED", s);
    }
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    Run {
        code: status.code().expect("exited normally"),
        stdout: String::from_utf8_lossy(&stdout).into_owned(),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Writes a fixture bank with `counts[i]` crops of class `class_{i:02}`.
pub fn write_bank(dir: &Path, counts: &[usize], seed: u64) -> Vec<String> {
    let bank = fixtures::synthetic_bank(counts, seed);
    let mut manifest = CropManifest::default();
    for c in bank.crops() {
        manifest.crops.push(write_crop(dir, c, None).unwrap());
    }
    manifest.write(dir).unwrap();
    fixtures::class_names(counts.len())
}

pub fn write_backgrounds(dir: &Path, n: usize, dims: (u32, u32), seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, img) in fixtures::backgrounds(n, dims, seed).iter().enumerate() {
        save_png(&dir.join(format!("bg_{i:03}.png")), img).unwrap();
    }
}

/// A bank plus backgrounds plus a config with a small canvas, all under
/// `root`. Returns the config path.
pub fn small_project(root: &Path, counts: &[usize], extra: &str) -> PathBuf {
    write_bank(&root.join("bank_b"), counts, 3);
    write_backgrounds(&root.join("bgs"), 5, (200, 150), 3);
    let cfg = root.join("run.json");
    let text = format!(
        r#"{{
  "paths": {{"banks": {{"train_b": "bank_b"}}, "backgrounds": "bgs"}},
  "synthesis": {{"canvas": [320, 240]}}{extra}
}}"#
    );
    std::fs::write(&cfg, text).unwrap();
    cfg
}

/// One single-object input for `annotate`: a disk on a textured frame, with
/// a full-frame background candidate and the object candidate.
pub fn write_annotate_input(dir: &Path, id: &str, label: &str, with_object: bool) {
    let (w, h) = (120u32, 90u32);
    let (cx, cy, r) = (50i64, 40i64, 18i64);
    let inside = |x: u32, y: u32| {
        let (dx, dy) = (x as i64 - cx, y as i64 - cy);
        dx * dx + dy * dy <= r * r + r
    };
    let img = RgbImage::from_fn(w, h, |x, y| {
        if inside(x, y) {
            Rgb([200, 150, 80])
        } else {
            Rgb([30, 40, (x * 2) as u8])
        }
    });
    save_png(&dir.join(format!("{id}.png")), &img).unwrap();
    std::fs::write(dir.join(format!("{id}.label")), format!("{label}\n")).unwrap();
    let masks = dir.join(format!("{id}.masks"));
    save_mask(&masks.join("00.png"), &BinaryMask::filled(w, h)).unwrap();
    if with_object {
        save_mask(&masks.join("01.png"), &BinaryMask::from_fn(w, h, inside)).unwrap();
    }
}

/// All files under `dir`, relative path to bytes.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut std::collections::BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = Default::default();
    walk(dir, dir, &mut out);
    out
}
