//! PNG and crop-bank persistence.
//!
//! A crop bank directory holds `<id>.crop.png` (color patch), `<id>.mask.png`
//! (single channel, 0 background, 255 foreground) and one `crops.json`
//! manifest listing every crop with its class label and origin.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{GrayImage, ImageEncoder, RgbImage};
use serde::{Deserialize, Serialize};

use crate::annotate::{ObjectCrop, Origin, UNKNOWN_CLASS};
use crate::compose::ObjectBank;
use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask};

pub const CROP_MANIFEST: &str = "crops.json";
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

fn encode_png(
    path: &Path,
    bytes: &[u8],
    w: u32,
    h: u32,
    color: image::ExtendedColorType,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    PngEncoder::new_with_quality(
        BufWriter::new(file),
        CompressionType::Fast,
        FilterType::Adaptive,
    )
    .write_image(bytes, w, h, color)
    .map_err(|e| Error::image(path, e))
}

pub fn save_png(path: &Path, img: &RgbImage) -> Result<()> {
    encode_png(
        path,
        img.as_raw(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgb8,
    )
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    Ok(image::open(path)
        .map_err(|e| Error::image(path, e))?
        .into_rgb8())
}

pub fn save_mask(path: &Path, m: &BinaryMask) -> Result<()> {
    let gray = GrayImage::from_fn(m.width(), m.height(), |x, y| {
        image::Luma([if m.get(x, y) { 255 } else { 0 }])
    });
    encode_png(
        path,
        gray.as_raw(),
        m.width(),
        m.height(),
        image::ExtendedColorType::L8,
    )
}

/// Any nonzero sample in any channel counts as foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)
        .map_err(|e| Error::image(path, e))?
        .into_rgb16();
    let (w, h) = img.dimensions();
    let bits = img.pixels().map(|p| p.0.iter().any(|&c| c != 0)).collect();
    Ok(BinaryMask::from_bits(w, h, bits).expect("pixel count matches dims"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropEntry {
    pub id: String,
    pub class_label: String,
    #[serde(default)]
    pub origin: Origin,
    /// Annotation box in the source image, when the crop came from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_bbox: Option<BBox>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropManifest {
    pub crops: Vec<CropEntry>,
}

impl CropManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(CROP_MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(CROP_MANIFEST);
        let mut sorted = self.clone();
        sorted.crops.sort_by(|a, b| a.id.cmp(&b.id));
        let text = serde_json::to_string_pretty(&sorted).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Writes the crop's patch and mask; the caller records the returned entry.
pub fn write_crop(dir: &Path, crop: &ObjectCrop, source_bbox: Option<BBox>) -> Result<CropEntry> {
    save_png(
        &dir.join(format!("{}.crop.png", crop.source_id)),
        crop.patch(),
    )?;
    save_mask(
        &dir.join(format!("{}.mask.png", crop.source_id)),
        crop.mask(),
    )?;
    Ok(CropEntry {
        id: crop.source_id.clone(),
        class_label: crop.class_label.clone(),
        origin: crop.origin,
        source_bbox,
    })
}

/// A loaded bank plus one diagnostic per rejected crop.
#[derive(Debug)]
pub struct BankLoad {
    pub bank: ObjectBank,
    pub diagnostics: Vec<String>,
}

/// Class index used for every bank: the configured classes in order, then
/// the reserved `unknown` label.
pub fn class_index_for(classes: &[String]) -> BTreeMap<String, usize> {
    let mut idx: BTreeMap<String, usize> = BTreeMap::new();
    for c in classes {
        let next = idx.len();
        idx.entry(c.clone()).or_insert(next);
    }
    let next = idx.len();
    idx.entry(UNKNOWN_CLASS.to_string()).or_insert(next);
    idx
}

/// Loads a crop bank.
///
/// Crops whose label is outside `classes` are relabeled `unknown` when
/// `cast_unknown` is set and rejected otherwise. Crops whose patch and mask
/// dims disagree, or whose mask is empty or not tight, are rejected. Load
/// order follows crop ids, not directory listing order.
pub fn load_object_bank(dir: &Path, classes: &[String], cast_unknown: bool) -> Result<BankLoad> {
    let mut manifest = CropManifest::read(dir)?;
    manifest.crops.sort_by(|a, b| a.id.cmp(&b.id));
    manifest.crops.dedup_by(|a, b| a.id == b.id);

    let mut crops = Vec::with_capacity(manifest.crops.len());
    let mut diagnostics = Vec::new();
    for entry in &manifest.crops {
        let label = if entry.class_label == UNKNOWN_CLASS || classes.contains(&entry.class_label) {
            entry.class_label.clone()
        } else if cast_unknown {
            UNKNOWN_CLASS.to_string()
        } else {
            diagnostics.push(format!(
                "{}: label {:?} is not a configured class",
                entry.id, entry.class_label
            ));
            continue;
        };
        let patch_path = dir.join(format!("{}.crop.png", entry.id));
        let mask_path = dir.join(format!("{}.mask.png", entry.id));
        let patch = load_rgb(&patch_path)?;
        let mask = load_mask(&mask_path)?;
        match ObjectCrop::new(patch, mask, label, &entry.id, entry.origin) {
            Ok(c) => crops.push(Arc::new(c)),
            Err(e) => diagnostics.push(format!("{}: rejected: {e}", rel(dir, &patch_path))),
        }
    }
    if crops.is_empty() {
        return Err(Error::EmptyBank);
    }
    let bank = ObjectBank::new(crops, class_index_for(classes))?;
    Ok(BankLoad { bank, diagnostics })
}

fn rel(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).display().to_string()
}

/// Plain image files directly inside `dir`, sorted by file name. Crop and
/// mask files of a bank are skipped so a bank directory can double as a
/// background source.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if name.ends_with(".crop.png") || name.ends_with(".mask.png") {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        if IMAGE_EXTENSIONS.contains(&ext.as_str()) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_images_dir(dir: &Path) -> Result<Vec<(String, RgbImage)>> {
    list_images(dir)?
        .into_iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            Ok((stem, load_rgb(&p)?))
        })
        .collect()
}
