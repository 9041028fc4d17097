use std::fs;
use std::path::Path;

use bakesynth::dataset::{
    dataset_stats, is_synthetic_dataset, validate_dataset, ValidationOptions,
};

use super::existing_dir;
use crate::config::RunConfig;
use crate::error::CliError;

pub fn stats(root: &Path, dir: &Path, json: Option<&Path>) -> Result<i32, CliError> {
    let dir = root.join(dir);
    let report = dataset_stats(existing_dir(&dir, "dataset")?)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match json {
        Some(p) if p == Path::new("-") => println!("{text}"),
        Some(p) => {
            print!("{report}");
            let path = root.join(p);
            fs::write(&path, text + "\n")
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        }
        None => print!("{report}"),
    }
    Ok(0)
}

pub fn validate(cfg: &RunConfig, dir: &Path) -> Result<i32, CliError> {
    let synthetic = is_synthetic_dataset(dir);
    let opts = ValidationOptions {
        scale_band: synthetic.then_some((
            cfg.synthesis.min_area_fraction,
            cfg.synthesis.max_area_fraction,
        )),
        band_tolerance: cfg.band_tolerance,
    };
    let report = validate_dataset(existing_dir(dir, "dataset")?, &opts)?;
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for v in &report.violations {
        println!("violation: {v}");
    }
    println!(
        "checked {} label files{}: {} violations, {} warnings",
        report.files_checked,
        if synthetic {
            " (synthetic, scale band enforced)"
        } else {
            ""
        },
        report.violations.len(),
        report.warnings.len()
    );
    Ok(if report.is_clean() { 0 } else { 1 })
}
