use std::path::{Path, PathBuf};

use crate::error::CliError;

mod annotate;
mod augment;
mod report;
mod synthesize;

pub use annotate::annotate;
pub use augment::augment;
pub use report::{stats, validate};
pub use synthesize::synthesize;

fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs:?} workers: {e}")))
}

fn required<'a>(value: &'a Option<PathBuf>, what: &str, flag: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| {
        CliError::Config(format!("no {what} given; pass {flag} or set paths.{what}"))
    })
}

fn existing_dir<'a>(dir: &'a Path, what: &str) -> Result<&'a Path, CliError> {
    if dir.is_dir() {
        Ok(dir)
    } else {
        Err(CliError::Data(format!(
            "{what} directory {} does not exist",
            dir.display()
        )))
    }
}
