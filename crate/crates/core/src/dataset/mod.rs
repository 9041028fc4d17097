//! Labeled images, class statistics, and everything that touches disk.

pub mod io;
pub mod labels;
pub mod stats;

use std::collections::BTreeMap;

use image::imageops::FilterType;
use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::augment::pixel::to_gray;
use crate::compose::ObjectBank;
use crate::geometry::BBox;

pub use io::{
    load_images_dir, load_mask, load_object_bank, load_rgb, save_mask, save_png, write_crop,
    BankLoad, CropEntry, CropManifest, CROP_MANIFEST,
};
pub use labels::{denormalize, export_labels, parse_labels, LabelRecord};
pub use stats::{
    dataset_stats, is_synthetic_dataset, validate_dataset, DatasetReport, ValidationOptions,
    ValidationReport,
};

/// Which training split an image belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    /// Captured single-object images.
    TrainB,
    /// Single-object images of types outside the class list.
    TrainC,
    /// Negatives with no annotations.
    TrainA,
    /// Background-free generated crops.
    TrainS,
    Synthetic,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub class_label: String,
    pub bbox: BBox,
}

impl Annotation {
    pub fn new(class_label: impl Into<String>, bbox: BBox) -> Self {
        Annotation {
            class_label: class_label.into(),
            bbox,
        }
    }
}

/// A raster with its box annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub image: RgbImage,
    pub annotations: Vec<Annotation>,
    pub source: SourceTag,
}

impl LabeledImage {
    pub fn new(image: RgbImage, annotations: Vec<Annotation>, source: SourceTag) -> Self {
        LabeledImage {
            image,
            annotations,
            source,
        }
    }

    /// Negative image with no annotations.
    pub fn negative(image: RgbImage) -> Self {
        LabeledImage::new(image, Vec::new(), SourceTag::TrainA)
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.image.dimensions()
    }

    /// Checks box containment, label membership and the negative-set rule.
    pub fn check(&self, classes: &[String]) -> Result<(), String> {
        let (w, h) = self.dimensions();
        let frame = BBox::full(w, h).ok_or("image has no pixels")?;
        if self.source == SourceTag::TrainA && !self.annotations.is_empty() {
            return Err("negative image carries annotations".into());
        }
        for a in &self.annotations {
            if !a.bbox.is_within(&frame) {
                return Err(format!("box {} exceeds {w}x{h} image", a.bbox));
            }
            if a.class_label != crate::UNKNOWN_CLASS && !classes.contains(&a.class_label) {
                return Err(format!(
                    "label {:?} is not a configured class",
                    a.class_label
                ));
            }
        }
        Ok(())
    }

    /// Fraction of the image area covered by each annotation box.
    pub fn area_fractions(&self) -> Vec<f64> {
        let (w, h) = self.dimensions();
        let area = w as f64 * h as f64;
        self.annotations
            .iter()
            .map(|a| a.bbox.area() as f64 / area)
            .collect()
    }
}

/// Output dims for a `w x h` image whose longer side becomes `longest_side`.
pub fn standardized_dims(w: u32, h: u32, longest_side: u32) -> (u32, u32) {
    let s = longest_side as f64 / w.max(h) as f64;
    if w >= h {
        (longest_side, ((h as f64 * s).round() as u32).max(1))
    } else {
        (((w as f64 * s).round() as u32).max(1), longest_side)
    }
}

/// Maps a box from a `from` raster onto a `to` raster.
///
/// Width and height are each rounded down or up, whichever pair keeps the
/// box area closest to the exact scaled area; the box centre is then
/// rounded and the box clamped into the frame. Rounding each edge on its own
/// would let the area fraction drift by up to one pixel row plus one pixel
/// column.
pub fn rescale_box(b: &BBox, from: (u32, u32), to: (u32, u32)) -> BBox {
    let sx = to.0 as f64 / from.0 as f64;
    let sy = to.1 as f64 / from.1 as f64;
    let (wf, hf) = (b.width() as f64 * sx, b.height() as f64 * sy);
    let options = |v: f64, n: u32| {
        let lo = (v.floor() as u32).clamp(1, n);
        let hi = (v.ceil() as u32).clamp(1, n);
        [lo, hi]
    };
    let target = wf * hf;
    let mut best = (0, 0, f64::INFINITY);
    for bw in options(wf, to.0) {
        for bh in options(hf, to.1) {
            let err = (bw as f64 * bh as f64 - target).abs();
            if err < best.2 {
                best = (bw, bh, err);
            }
        }
    }
    let (bw, bh, _) = best;
    let cx = (b.x_min() as f64 + b.x_max() as f64) / 2.0 * sx;
    let cy = (b.y_min() as f64 + b.y_max() as f64) / 2.0 * sy;
    let place =
        |c: f64, size: u32, n: u32| ((c - size as f64 / 2.0).round().max(0.0) as u32).min(n - size);
    BBox::from_origin_size(place(cx, bw, to.0), place(cy, bh, to.1), bw, bh)
        .expect("sizes are at least 1")
}

/// Resizes so the longer side equals `longest_side`, keeping the aspect
/// ratio; boxes follow via [`rescale_box`]. Images that already conform are
/// returned as is.
pub fn standardize_image(img: &LabeledImage, longest_side: u32) -> LabeledImage {
    assert!(longest_side >= 32, "longest_side must be at least 32");
    let (w, h) = img.dimensions();
    if w.max(h) == longest_side || w == 0 || h == 0 {
        return img.clone();
    }
    let (nw, nh) = standardized_dims(w, h, longest_side);
    let image = image::imageops::resize(&img.image, nw, nh, FilterType::Triangle);
    let annotations = img
        .annotations
        .iter()
        .map(|a| {
            Annotation::new(
                a.class_label.clone(),
                rescale_box(&a.bbox, (w, h), (nw, nh)),
            )
        })
        .collect();
    LabeledImage::new(image, annotations, img.source)
}

/// Grayscale copy, for the optional grayscale export.
pub fn grayscale(img: &LabeledImage) -> LabeledImage {
    LabeledImage {
        image: to_gray(&img.image),
        ..img.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub count: usize,
    pub share: f64,
}

/// Per-class counts and shares.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub total: usize,
    pub classes: BTreeMap<String, ClassShare>,
}

impl ClassDistribution {
    /// Builds a distribution from labels; `classes` are listed even at count 0.
    pub fn from_labels<'a>(
        labels: impl IntoIterator<Item = &'a str>,
        classes: &[String],
    ) -> ClassDistribution {
        let mut counts: BTreeMap<String, usize> = classes.iter().map(|c| (c.clone(), 0)).collect();
        for l in labels {
            *counts.entry(l.to_string()).or_default() += 1;
        }
        ClassDistribution::from_counts(counts)
    }

    pub fn from_counts(counts: BTreeMap<String, usize>) -> ClassDistribution {
        let total: usize = counts.values().sum();
        let classes = counts
            .into_iter()
            .map(|(k, count)| {
                let share = if total == 0 {
                    0.0
                } else {
                    count as f64 / total as f64
                };
                (k, ClassShare { count, share })
            })
            .collect();
        ClassDistribution { total, classes }
    }

    pub fn share(&self, class: &str) -> f64 {
        self.classes.get(class).map_or(0.0, |c| c.share)
    }

    pub fn count(&self, class: &str) -> usize {
        self.classes.get(class).map_or(0, |c| c.count)
    }
}

/// Distribution of annotations over a set of labeled images.
pub fn class_distribution(images: &[LabeledImage], classes: &[String]) -> ClassDistribution {
    ClassDistribution::from_labels(
        images
            .iter()
            .flat_map(|i| i.annotations.iter().map(|a| a.class_label.as_str())),
        classes,
    )
}

/// Distribution of crops in a bank.
pub fn bank_distribution(bank: &ObjectBank) -> ClassDistribution {
    let counts = bank
        .class_index()
        .keys()
        .map(|c| (c.clone(), bank.count(c)))
        .collect();
    ClassDistribution::from_counts(counts)
}
