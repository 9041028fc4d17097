use std::fs;
use std::path::{Path, PathBuf};

use bakesynth::dataset::io::{list_images, load_mask, load_rgb, write_crop, CropManifest};
use bakesynth::{annotate_single_object_image, Error, MaskCandidateSet, SourceTag};
use rayon::prelude::*;

use super::{existing_dir, required, worker_pool};
use crate::config::RunConfig;
use crate::error::CliError;

enum Outcome {
    Done(bakesynth::dataset::io::CropEntry),
    Skipped(String),
    Failed(String),
}

fn candidate_masks(dir: &Path) -> bakesynth::Result<Vec<bakesynth::BinaryMask>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_mask(p)).collect()
}

fn annotate_one(image_path: &Path, out: &Path, cfg: &RunConfig) -> Outcome {
    let dir = image_path.parent().expect("listed files have a parent");
    let id = image_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let label_path = dir.join(format!("{id}.label"));
    let label = match fs::read_to_string(&label_path) {
        Ok(t) => t.trim().to_string(),
        Err(e) => return Outcome::Failed(format!("{}: {e}", label_path.display())),
    };
    if label.is_empty() || label.contains(char::is_whitespace) {
        return Outcome::Failed(format!(
            "{}: expected a single class label",
            label_path.display()
        ));
    }
    let result = (|| {
        let image = load_rgb(image_path)?;
        let masks = candidate_masks(&dir.join(format!("{id}.masks")))?;
        let (w, h) = image.dimensions();
        let set = MaskCandidateSet::new(w, h, masks)?;
        let (labeled, crop) = annotate_single_object_image(
            &image,
            &set,
            &label,
            &id,
            SourceTag::TrainB,
            &cfg.annotate,
        )?;
        write_crop(out, &crop, Some(labeled.annotations[0].bbox))
    })();
    match result {
        Ok(entry) => Outcome::Done(entry),
        Err(e @ (Error::NoQualifyingMask | Error::EmptyAfterRefinement | Error::EmptyMask)) => {
            Outcome::Skipped(format!("{id}: {e}"))
        }
        Err(e) => Outcome::Failed(format!("{id}: {e}")),
    }
}

pub fn annotate(cfg: &RunConfig) -> Result<i32, CliError> {
    let input = existing_dir(required(&cfg.paths.input, "input", "--input")?, "input")?;
    let output = required(&cfg.paths.output, "output", "--output")?;
    fs::create_dir_all(output).map_err(|e| CliError::Data(format!("{}: {e}", output.display())))?;
    let images = list_images(input)?;

    let outcomes: Vec<Outcome> = worker_pool(cfg.jobs)?.install(|| {
        images
            .par_iter()
            .map(|p| annotate_one(p, output, cfg))
            .collect()
    });

    let mut manifest = CropManifest::default();
    let (mut skipped, mut failed) = (0usize, 0usize);
    for o in outcomes {
        match o {
            Outcome::Done(entry) => manifest.crops.push(entry),
            Outcome::Skipped(msg) => {
                skipped += 1;
                log::warn!("skipped {msg}");
            }
            Outcome::Failed(msg) => {
                failed += 1;
                log::error!("failed {msg}");
            }
        }
    }
    manifest.write(output)?;
    println!(
        "annotated {} of {} images: {} crops, {skipped} skipped, {failed} failed",
        manifest.crops.len(),
        images.len(),
        manifest.crops.len()
    );
    if skipped > 0 {
        println!("warnings: {skipped}");
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
