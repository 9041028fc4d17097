use std::collections::BTreeSet;

use bakesynth::compose::{balance_pool, duplication_factors, synthesize_dataset};
use bakesynth::dataset::io::{load_images_dir, load_object_bank, CropManifest};
use bakesynth::{ObjectBank, UNKNOWN_CLASS};

use super::{existing_dir, required};
use crate::config::RunConfig;
use crate::error::CliError;

/// The configured classes, or when none are configured, every label found
/// in the manifests of banks that keep their labels.
fn class_list(
    cfg: &RunConfig,
    banks: &[(crate::BankName, std::path::PathBuf)],
) -> Result<Vec<String>, CliError> {
    if !cfg.classes.is_empty() {
        return Ok(cfg.classes.clone());
    }
    let mut labels = BTreeSet::new();
    for (name, dir) in banks {
        if name.casts_unknown() {
            continue;
        }
        for e in CropManifest::read(dir)?.crops {
            if e.class_label != UNKNOWN_CLASS {
                labels.insert(e.class_label);
            }
        }
    }
    log::info!(
        "no classes configured; using the {} labels found in the banks",
        labels.len()
    );
    Ok(labels.into_iter().collect())
}

pub fn synthesize(cfg: &RunConfig) -> Result<i32, CliError> {
    let output = required(&cfg.paths.output, "output", "--output")?;
    let bg_dir = existing_dir(
        required(&cfg.paths.backgrounds, "backgrounds", "--backgrounds")?,
        "backgrounds",
    )?;
    let (banks, balance) = cfg.pool_recipe()?;
    for (name, dir) in &banks {
        existing_dir(dir, name.as_str())?;
    }
    let classes = class_list(cfg, &banks)?;

    let mut loaded = Vec::new();
    for (name, dir) in &banks {
        let l = load_object_bank(dir, &classes, name.casts_unknown())?;
        for d in &l.diagnostics {
            log::warn!("{name}: {d}");
        }
        log::info!("{name}: {} crops from {}", l.bank.len(), dir.display());
        loaded.push(l.bank);
    }
    let mut bank = ObjectBank::merge(loaded)?;
    if balance {
        let t = cfg.synthesis.oversample_threshold;
        for (class, k) in duplication_factors(&bank, t) {
            if k > 1 {
                log::info!("balancing: {class} x{k}");
            }
        }
        bank = balance_pool(&bank, t);
    }

    let backgrounds: Vec<_> = load_images_dir(bg_dir)?
        .into_iter()
        .map(|(_, img)| img)
        .collect();
    log::info!(
        "{} backgrounds from {}",
        backgrounds.len(),
        bg_dir.display()
    );

    let manifest = synthesize_dataset(
        &bank,
        &backgrounds,
        &cfg.synthesis,
        cfg.n_images,
        output,
        cfg.jobs.unwrap_or(0),
    )?;
    let total = manifest.total_annotations;
    println!("wrote {} images to {}", manifest.n_images, output.display());
    println!(
        "annotations: {total}, mean per image {:.3}",
        total as f64 / manifest.n_images as f64
    );
    for (class, n) in &manifest.per_class_paste_counts {
        let share = if total > 0 {
            *n as f64 / total as f64
        } else {
            0.0
        };
        println!("  {class:<28} {n:>7}  {:>6.2}%", share * 100.0);
    }
    Ok(0)
}
