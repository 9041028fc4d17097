//! Statistics and invariant checks over a dataset directory.
//!
//! A dataset directory either has `images/` and `labels/` subdirectories or
//! keeps images and `.txt` label files side by side. Images and labels are
//! paired by file stem. An optional `manifest.json` supplies class names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::io::list_images;
use super::labels::{denormalize, parse_labels, LabelRecord};
use super::ClassDistribution;
use crate::compose::SynthesisManifest;
use crate::error::{Error, Result};

pub const AREA_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Clone)]
struct Pair {
    stem: String,
    image: PathBuf,
    label: PathBuf,
}

#[derive(Debug, Default)]
struct Layout {
    pairs: Vec<Pair>,
    warnings: Vec<String>,
    class_names: BTreeMap<usize, String>,
    manifest: Option<SynthesisManifest>,
}

fn list_labels(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn stem_of(p: &Path) -> String {
    p.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn discover(dir: &Path) -> Result<Layout> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let (img_dir, lbl_dir) = if dir.join("images").is_dir() || dir.join("labels").is_dir() {
        (dir.join("images"), dir.join("labels"))
    } else {
        (dir.to_path_buf(), dir.to_path_buf())
    };
    let images: BTreeMap<String, PathBuf> = if img_dir.is_dir() {
        list_images(&img_dir)?
            .into_iter()
            .map(|p| (stem_of(&p), p))
            .collect()
    } else {
        BTreeMap::new()
    };
    let labels: BTreeMap<String, PathBuf> = list_labels(&lbl_dir)?
        .into_iter()
        .map(|p| (stem_of(&p), p))
        .collect();

    let mut layout = Layout::default();
    let stems: BTreeSet<&String> = images.keys().chain(labels.keys()).collect();
    for stem in stems {
        match (images.get(stem), labels.get(stem)) {
            (Some(i), Some(l)) => layout.pairs.push(Pair {
                stem: stem.clone(),
                image: i.clone(),
                label: l.clone(),
            }),
            (Some(i), None) => layout
                .warnings
                .push(format!("orphan image without label: {}", i.display())),
            (None, Some(l)) => layout
                .warnings
                .push(format!("orphan label without image: {}", l.display())),
            (None, None) => unreachable!(),
        }
    }

    let manifest_path = dir.join("manifest.json");
    if manifest_path.is_file() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let m: SynthesisManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(&manifest_path, e))?;
        layout.class_names = m.class_index.iter().map(|(k, v)| (*v, k.clone())).collect();
        layout.manifest = Some(m);
    }
    if layout.pairs.is_empty() {
        layout
            .warnings
            .push(format!("no image/label pairs found in {}", dir.display()));
    }
    Ok(layout)
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub n_images: usize,
    pub n_annotations: usize,
    pub mean_objects_per_image: f64,
    pub min_objects_per_image: usize,
    pub max_objects_per_image: usize,
    pub per_class: ClassDistribution,
    pub min_area_fraction: Option<f64>,
    pub max_area_fraction: Option<f64>,
    /// Nonempty bins of width [`AREA_BIN_WIDTH`].
    pub area_fraction_histogram: Vec<HistogramBin>,
    pub warnings: Vec<String>,
}

pub fn dataset_stats(dir: &Path) -> Result<DatasetReport> {
    let mut layout = discover(dir)?;
    let mut per_image = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);

    for pair in &layout.pairs {
        let text = fs::read_to_string(&pair.label).map_err(|e| Error::io(&pair.label, e))?;
        let records = match parse_labels(&text, &pair.label) {
            Ok(r) => r,
            Err(e) => {
                layout.warnings.push(e.to_string());
                continue;
            }
        };
        per_image.push(records.len());
        for r in &records {
            let name = layout
                .class_names
                .get(&r.class_id)
                .cloned()
                .unwrap_or_else(|| r.class_id.to_string());
            *counts.entry(name).or_default() += 1;
            let f = r.area_fraction();
            fmin = fmin.min(f);
            fmax = fmax.max(f);
            *bins.entry((f / AREA_BIN_WIDTH) as usize).or_default() += 1;
        }
    }

    let n_annotations: usize = per_image.iter().sum();
    Ok(DatasetReport {
        n_images: per_image.len(),
        n_annotations,
        mean_objects_per_image: if per_image.is_empty() {
            0.0
        } else {
            n_annotations as f64 / per_image.len() as f64
        },
        min_objects_per_image: per_image.iter().copied().min().unwrap_or(0),
        max_objects_per_image: per_image.iter().copied().max().unwrap_or(0),
        per_class: ClassDistribution::from_counts(counts),
        min_area_fraction: fmin.is_finite().then_some(fmin),
        max_area_fraction: fmax.is_finite().then_some(fmax),
        area_fraction_histogram: bins
            .into_iter()
            .map(|(b, count)| HistogramBin {
                lo: b as f64 * AREA_BIN_WIDTH,
                hi: (b + 1) as f64 * AREA_BIN_WIDTH,
                count,
            })
            .collect(),
        warnings: layout.warnings,
    })
}

impl fmt::Display for DatasetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "images:               {}", self.n_images)?;
        writeln!(f, "annotations:          {}", self.n_annotations)?;
        writeln!(
            f,
            "objects per image:    mean {:.3}  min {}  max {}",
            self.mean_objects_per_image, self.min_objects_per_image, self.max_objects_per_image
        )?;
        if let (Some(lo), Some(hi)) = (self.min_area_fraction, self.max_area_fraction) {
            writeln!(f, "area fraction:        min {lo:.4}  max {hi:.4}")?;
        }
        writeln!(f, "classes:              {}", self.per_class.classes.len())?;
        for (name, c) in &self.per_class.classes {
            writeln!(f, "  {name:<28} {:>7}  {:>6.2}%", c.count, c.share * 100.0)?;
        }
        if !self.area_fraction_histogram.is_empty() {
            writeln!(f, "area fraction histogram:")?;
            for b in &self.area_fraction_histogram {
                writeln!(f, "  [{:.2}, {:.2})  {}", b.lo, b.hi, b.count)?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationOptions {
    /// Enforce `area fraction in [min*(1-eps), max*(1+eps)]` on every box.
    pub scale_band: Option<(f64, f64)>,
    pub band_tolerance: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub files_checked: usize,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

const NORM_TOL: f64 = 1e-6;

fn check_record(
    r: &LabelRecord,
    dims: (u32, u32),
    class_names: &BTreeMap<usize, String>,
    opts: &ValidationOptions,
) -> std::result::Result<(), String> {
    if !class_names.is_empty() && !class_names.contains_key(&r.class_id) {
        return Err(format!(
            "class id {} not in manifest class index",
            r.class_id
        ));
    }
    for (name, v) in [("cx", r.cx), ("cy", r.cy), ("w", r.w), ("h", r.h)] {
        if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&v) {
            return Err(format!("{name} = {v} outside [0, 1]"));
        }
    }
    if r.w <= 0.0 || r.h <= 0.0 {
        return Err("box has no area".into());
    }
    let edges = [
        r.cx - r.w / 2.0,
        r.cy - r.h / 2.0,
        r.cx + r.w / 2.0,
        r.cy + r.h / 2.0,
    ];
    if edges.iter().any(|e| *e < -NORM_TOL || *e > 1.0 + NORM_TOL) {
        return Err(format!("box edges {edges:?} leave the image"));
    }
    if let Some((lo, hi)) = opts.scale_band {
        let f = r.area_fraction();
        let (lo, hi) = (
            lo * (1.0 - opts.band_tolerance),
            hi * (1.0 + opts.band_tolerance),
        );
        if f < lo || f > hi {
            return Err(format!("area fraction {f:.5} outside [{lo:.5}, {hi:.5}]"));
        }
    }
    let (w, h) = dims;
    let b = denormalize(r, w, h).ok_or("box vanishes at pixel resolution")?;
    let (fw, fh) = (w as f64, h as f64);
    let again = LabelRecord {
        class_id: r.class_id,
        cx: (((b.x_min() + b.x_max()) as f64 / 2.0 / fw) * 1e6).round() / 1e6,
        cy: (((b.y_min() + b.y_max()) as f64 / 2.0 / fh) * 1e6).round() / 1e6,
        w: ((b.width() as f64 / fw) * 1e6).round() / 1e6,
        h: ((b.height() as f64 / fh) * 1e6).round() / 1e6,
    };
    let b2 = denormalize(&again, w, h).ok_or("box vanishes on re-export")?;
    let close = |a: u32, c: u32| a.abs_diff(c) <= 1;
    if !(close(b.x_min(), b2.x_min())
        && close(b.y_min(), b2.y_min())
        && close(b.x_max(), b2.x_max())
        && close(b.y_max(), b2.y_max()))
    {
        return Err(format!("round trip drifts: {b} -> {b2}"));
    }
    Ok(())
}

/// Checks every label file: parseable, boxes inside the frame, known class
/// ids, optional scale band, and a stable parse/re-export round trip.
pub fn validate_dataset(dir: &Path, opts: &ValidationOptions) -> Result<ValidationReport> {
    let layout = discover(dir)?;
    let mut report = ValidationReport {
        warnings: layout.warnings.clone(),
        ..Default::default()
    };
    for pair in &layout.pairs {
        report.files_checked += 1;
        let text = fs::read_to_string(&pair.label).map_err(|e| Error::io(&pair.label, e))?;
        let records = match parse_labels(&text, &pair.label) {
            Ok(r) => r,
            Err(e) => {
                report.violations.push(e.to_string());
                continue;
            }
        };
        let dims = match image::image_dimensions(&pair.image) {
            Ok(d) => d,
            Err(e) => {
                report
                    .violations
                    .push(format!("{}: unreadable image: {e}", pair.image.display()));
                continue;
            }
        };
        for (i, r) in records.iter().enumerate() {
            if let Err(msg) = check_record(r, dims, &layout.class_names, opts) {
                report.violations.push(format!(
                    "{} line {}: {msg} (image {})",
                    pair.label.display(),
                    i + 1,
                    pair.stem
                ));
            }
        }
    }
    Ok(report)
}

/// Whether `dir` carries a synthesis manifest.
pub fn is_synthetic_dataset(dir: &Path) -> bool {
    dir.join("manifest.json").is_file()
}
