use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bakesynth::augment::dp_pipeline;
use bakesynth::dataset::io::{list_images, load_rgb, save_png};
use bakesynth::dataset::{denormalize, export_labels, parse_labels, standardize_image};
use bakesynth::{Annotation, LabeledImage, RngStream, SourceTag};
use rayon::prelude::*;

use super::{existing_dir, required, worker_pool};
use crate::config::RunConfig;
use crate::error::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Processes one image and its label file. Returns the number of boxes
/// dropped because they vanished at pixel resolution.
fn augment_one(
    stem: &str,
    image_path: &Path,
    label_path: &Path,
    out: &Path,
    cfg: &RunConfig,
) -> Result<usize, CliError> {
    let text = fs::read_to_string(label_path).map_err(|e| io_err(label_path, e))?;
    let records = parse_labels(&text, label_path)?;
    let image = load_rgb(image_path)?;
    let (w, h) = image.dimensions();
    // class ids pass through untouched, so the label names are the ids
    let mut index = BTreeMap::new();
    let mut annotations = Vec::with_capacity(records.len());
    let mut dropped = 0;
    for r in &records {
        index.insert(r.class_id.to_string(), r.class_id);
        match denormalize(r, w, h) {
            Some(b) => annotations.push(Annotation::new(r.class_id.to_string(), b)),
            None => dropped += 1,
        }
    }
    let source = LabeledImage::new(image, annotations, SourceTag::TrainB);

    let mut result = match cfg.export.longest_side {
        Some(side) => standardize_image(&source, side),
        None => source.clone(),
    };
    if cfg.export.augment {
        let stream = RngStream::new(cfg.synthesis.seed, format!("augment/{stem}"));
        let outcome = dp_pipeline(
            &result.image,
            &result.annotations,
            &cfg.augmentation,
            &stream,
        );
        result = LabeledImage::new(outcome.image, outcome.annotations, SourceTag::TrainB);
    }

    save_png(
        &out.join("images").join(format!("{stem}.png")),
        &result.image,
    )?;
    let label_out = out.join("labels").join(format!("{stem}.txt"));
    // untouched boxes keep their original text, byte for byte
    let unchanged = dropped == 0
        && result.dimensions() == source.dimensions()
        && result.annotations == source.annotations;
    let new_text = if unchanged {
        text
    } else {
        export_labels(&result, &index)?
    };
    fs::write(&label_out, new_text).map_err(|e| io_err(&label_out, e))?;
    Ok(dropped)
}

fn split_layout(dir: &Path) -> (PathBuf, PathBuf) {
    if dir.join("images").is_dir() || dir.join("labels").is_dir() {
        (dir.join("images"), dir.join("labels"))
    } else {
        (dir.to_path_buf(), dir.to_path_buf())
    }
}

pub fn augment(cfg: &RunConfig) -> Result<i32, CliError> {
    let input = existing_dir(required(&cfg.paths.input, "input", "--input")?, "input")?;
    let output = required(&cfg.paths.output, "output", "--output")?;
    if output == input {
        return Err(CliError::Config(
            "augment output must differ from its input".into(),
        ));
    }
    for d in ["images", "labels"] {
        let p = output.join(d);
        fs::create_dir_all(&p).map_err(|e| io_err(&p, e))?;
    }
    let (img_dir, lbl_dir) = split_layout(input);
    let mut jobs = Vec::new();
    for image in list_images(existing_dir(&img_dir, "images")?)? {
        let stem = image
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let label = lbl_dir.join(format!("{stem}.txt"));
        if label.is_file() {
            jobs.push((stem, image, label));
        } else {
            log::warn!("skipping {}: no label file", image.display());
        }
    }
    let manifest = input.join(bakesynth::compose::SYNTH_MANIFEST);
    if manifest.is_file() {
        let to = output.join(bakesynth::compose::SYNTH_MANIFEST);
        fs::copy(&manifest, &to).map_err(|e| io_err(&to, e))?;
    }

    let results: Vec<Result<usize, CliError>> = worker_pool(cfg.jobs)?.install(|| {
        jobs.par_iter()
            .map(|(stem, image, label)| augment_one(stem, image, label, output, cfg))
            .collect()
    });
    let mut failed = 0;
    let mut dropped = 0;
    for ((stem, _, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(d) => dropped += d,
            Err(e) => {
                failed += 1;
                log::error!("{stem}: {e}");
            }
        }
    }
    if dropped > 0 {
        log::warn!("{dropped} boxes too small to survive at pixel resolution were dropped");
    }
    println!(
        "augmented {} of {} images into {}",
        jobs.len() - failed,
        jobs.len(),
        output.display()
    );
    Ok(if failed > 0 { 1 } else { 0 })
}
