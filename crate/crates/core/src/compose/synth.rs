use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use image::RgbImage;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotate::ObjectCrop;
use crate::augment::{crop::augment_for_paste, ParamRange, PasteAugmentation};
use crate::compose::bank::ObjectBank;
use crate::compose::mosaic::mosaic_background;
use crate::compose::placement::{find_free_spot_runs, OccupancyMask, RowRuns};
use crate::compose::scale::clamp_object_scale;
use crate::dataset::io::save_png;
use crate::dataset::labels::export_labels;
use crate::dataset::{Annotation, LabeledImage, SourceTag};
use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask, StructuringElement};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Output width and height in pixels.
    pub canvas: [u32; 2],
    /// Inclusive range the per-image object count is drawn from.
    pub object_count: ParamRange<u32>,
    pub min_area_fraction: f64,
    pub max_area_fraction: f64,
    pub oversample_threshold: f64,
    pub placement_dilation: StructuringElement,
    pub max_placement_attempts: u32,
    pub paste_augmentation: PasteAugmentation,
    pub seed: u64,
    /// File name prefix for generated images.
    pub run_name: String,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            canvas: [1280, 960],
            object_count: ParamRange::new(16, 30),
            min_area_fraction: 0.03,
            max_area_fraction: 0.25,
            oversample_threshold: 0.03,
            placement_dilation: StructuringElement::square(8),
            max_placement_attempts: 100,
            paste_augmentation: PasteAugmentation::default(),
            seed: 0,
            run_name: "synth".into(),
        }
    }
}

impl SynthesisConfig {
    pub fn canvas_dims(&self) -> (u32, u32) {
        (self.canvas[0], self.canvas[1])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        let [w, h] = self.canvas;
        if w < 2 || h < 2 {
            return fail(format!("canvas must be at least 2x2, got {w}x{h}"));
        }
        if self.object_count.min > self.object_count.max {
            return fail(format!(
                "object_count: empty range [{}, {}]",
                self.object_count.min, self.object_count.max
            ));
        }
        let (lo, hi) = (self.min_area_fraction, self.max_area_fraction);
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return fail(format!(
                "need 0 < min_area_fraction < max_area_fraction < 1, got {lo} and {hi}"
            ));
        }
        if !(self.oversample_threshold > 0.0 && self.oversample_threshold < 1.0) {
            return fail(format!(
                "oversample_threshold must be in (0, 1), got {}",
                self.oversample_threshold
            ));
        }
        if self.max_placement_attempts == 0 {
            return fail("max_placement_attempts must be positive".into());
        }
        self.placement_dilation.validate().map_err(Error::Config)?;
        self.paste_augmentation.validate().map_err(Error::Config)?;
        if self.run_name.is_empty() || self.run_name.contains(['/', '\\']) {
            return fail(format!(
                "run_name {:?} is not a plain file name prefix",
                self.run_name
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// One object as it ended up on the canvas.
#[derive(Debug, Clone)]
pub struct PastedObject {
    pub class_label: String,
    pub x: u32,
    pub y: u32,
    /// Undilated mask, relative to `(x, y)`.
    pub mask: BinaryMask,
}

impl PastedObject {
    pub fn bbox(&self) -> BBox {
        BBox::from_origin_size(self.x, self.y, self.mask.width(), self.mask.height())
            .expect("pasted masks are nonempty")
    }

    /// The mask at canvas coordinates.
    pub fn canvas_mask(&self, canvas: (u32, u32)) -> BinaryMask {
        let mut m = BinaryMask::new(canvas.0, canvas.1);
        for (x, y) in self.mask.foreground() {
            m.set(self.x + x, self.y + y, true);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub labeled: LabeledImage,
    pub pasted: Vec<PastedObject>,
    /// Object count drawn before placement; `pasted.len()` can be lower.
    pub drawn: u32,
}

fn alpha_paste(canvas: &mut RgbImage, c: &ObjectCrop, x: u32, y: u32) {
    let patch = c.patch();
    for (ox, oy) in c.mask().foreground() {
        canvas.put_pixel(x + ox, y + oy, *patch.get_pixel(ox, oy));
    }
}

/// Builds synthetic image `index`. The result depends only on the bank,
/// the backgrounds, the config and `index`.
pub fn synthesize_image(
    bank: &ObjectBank,
    backgrounds: &[RgbImage],
    cfg: &SynthesisConfig,
    index: u64,
) -> Result<Synthesis> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let canvas_dims = cfg.canvas_dims();
    let stream = RngStream::new(cfg.seed, format!("synth/{index}"));
    let n = cfg.object_count.sample(&mut stream.derive("count").rng());
    let mut canvas = mosaic_background(backgrounds, canvas_dims, &stream.derive("mosaic"))?;
    let mut occupancy = OccupancyMask::new(canvas_dims.0, canvas_dims.1);
    let mut draw = stream.derive("draw").rng();
    let mut place = stream.derive("place").rng();

    let mut annotations = Vec::with_capacity(n as usize);
    let mut pasted = Vec::with_capacity(n as usize);
    for j in 0..n {
        let source = &bank.crops()[draw.gen_range(0..bank.len())];
        let augmented = augment_for_paste(
            source,
            &cfg.paste_augmentation,
            &stream.derive(format!("paste/{j}")),
        )?;
        let obj = clamp_object_scale(
            &augmented,
            canvas_dims,
            cfg.min_area_fraction,
            cfg.max_area_fraction,
        )?;
        let runs = RowRuns::of(obj.mask());
        let Some((x, y)) =
            find_free_spot_runs(&occupancy, &runs, cfg.max_placement_attempts, &mut place)
        else {
            log::debug!("image {index}: no free spot for object {j}, skipped");
            continue;
        };
        alpha_paste(&mut canvas, &obj, x, y);
        occupancy.add_dilated(obj.mask(), x, y, &cfg.placement_dilation);
        let placed = PastedObject {
            class_label: obj.class_label.clone(),
            x,
            y,
            mask: obj.mask().clone(),
        };
        annotations.push(Annotation::new(&obj.class_label, placed.bbox()));
        pasted.push(placed);
    }
    Ok(Synthesis {
        labeled: LabeledImage::new(canvas, annotations, SourceTag::Synthetic),
        pasted,
        drawn: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisManifest {
    pub config_hash: String,
    pub seed: u64,
    pub run_name: String,
    pub n_images: u64,
    pub total_annotations: u64,
    pub class_index: BTreeMap<String, usize>,
    pub per_class_paste_counts: BTreeMap<String, u64>,
}

pub const SYNTH_MANIFEST: &str = "manifest.json";

pub fn image_stem(run_name: &str, index: u64) -> String {
    format!("{run_name}_{index:06}")
}

/// Writes `n_images` images with their label files and a manifest under
/// `out_dir`. Images are produced on `jobs` worker threads (0 picks the
/// rayon default); output does not depend on the thread count.
pub fn synthesize_dataset(
    bank: &ObjectBank,
    backgrounds: &[RgbImage],
    cfg: &SynthesisConfig,
    n_images: u64,
    out_dir: &Path,
    jobs: usize,
) -> Result<SynthesisManifest> {
    cfg.validate()?;
    if n_images == 0 {
        return Err(Error::Config("n_images must be at least 1".into()));
    }
    let images_dir = out_dir.join("images");
    let labels_dir = out_dir.join("labels");
    for d in [&images_dir, &labels_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let per_image: Vec<Vec<String>> = pool.install(|| {
        (0..n_images)
            .into_par_iter()
            .map(|i| {
                let s = synthesize_image(bank, backgrounds, cfg, i)?;
                let stem = image_stem(&cfg.run_name, i);
                save_png(&images_dir.join(format!("{stem}.png")), &s.labeled.image)?;
                let text = export_labels(&s.labeled, bank.class_index())?;
                let label_path = labels_dir.join(format!("{stem}.txt"));
                fs::write(&label_path, text).map_err(|e| Error::io(&label_path, e))?;
                Ok(s.labeled
                    .annotations
                    .into_iter()
                    .map(|a| a.class_label)
                    .collect())
            })
            .collect::<Result<_>>()
    })?;

    let mut per_class: BTreeMap<String, u64> =
        bank.class_index().keys().map(|k| (k.clone(), 0)).collect();
    for label in per_image.iter().flatten() {
        *per_class.entry(label.clone()).or_default() += 1;
    }
    let manifest = SynthesisManifest {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        run_name: cfg.run_name.clone(),
        n_images,
        total_annotations: per_class.values().sum(),
        class_index: bank.class_index().clone(),
        per_class_paste_counts: per_class,
    };
    let path = out_dir.join(SYNTH_MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
