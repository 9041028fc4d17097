//! Run configuration: one JSON file covering every command.
//!
//! Resolution order for each setting is command-line flag, then config
//! file, then environment (`BAKESYNTH_SEED` only), then the built-in
//! default. Relative paths resolve against `--root`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bakesynth::{AnnotateConfig, AugmentationSpec, SynthesisConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SEED_ENV: &str = "BAKESYNTH_SEED";

/// Object banks a run can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankName {
    /// Captured single-object crops of the configured classes.
    TrainB,
    /// Captured crops of other goods, relabeled `unknown` on load.
    TrainC,
    /// Generated, background-free crops.
    TrainS,
}

impl BankName {
    pub const ALL: [BankName; 3] = [BankName::TrainB, BankName::TrainC, BankName::TrainS];

    pub fn as_str(self) -> &'static str {
        match self {
            BankName::TrainB => "train_b",
            BankName::TrainC => "train_c",
            BankName::TrainS => "train_s",
        }
    }

    pub fn casts_unknown(self) -> bool {
        self == BankName::TrainC
    }
}

impl fmt::Display for BankName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BankName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        BankName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown bank {s:?}, expected one of train_b, train_c, train_s"))
    }
}

/// Named training-set compositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Baseline,
    TypeBalance,
    Unknown,
    Pix2pix,
    AllData,
}

impl Preset {
    /// Banks feeding the pool, and whether the pool is balanced.
    pub fn recipe(self) -> (&'static [BankName], bool) {
        use BankName::*;
        match self {
            Preset::Baseline => (&[TrainB], false),
            Preset::TypeBalance => (&[TrainB], true),
            Preset::Unknown => (&[TrainB, TrainC], true),
            Preset::Pix2pix => (&[TrainS], false),
            Preset::AllData => (&[TrainB, TrainC, TrainS], true),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Input directory of `annotate` and `augment`.
    pub input: Option<PathBuf>,
    /// Output directory of `annotate`, `synthesize` and `augment`.
    pub output: Option<PathBuf>,
    /// Directory of background images for mosaics.
    pub backgrounds: Option<PathBuf>,
    pub banks: BTreeMap<BankName, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    /// Resize so the longer side has this many pixels; `null` keeps sizes.
    pub longest_side: Option<u32>,
    /// Run the online augmentation chain on every exported image.
    pub augment: bool,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            longest_side: Some(1280),
            augment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    /// Class labels in index order. `unknown` is appended automatically.
    pub classes: Vec<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub n_images: u64,
    /// Overrides the preset's balancing choice when set.
    pub balance: Option<bool>,
    /// Relative tolerance on the scale band when validating synthetic sets.
    pub band_tolerance: f64,
    pub paths: Paths,
    pub annotate: AnnotateConfig,
    pub synthesis: SynthesisConfig,
    pub augmentation: AugmentationSpec,
    pub export: ExportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            classes: Vec::new(),
            seed: None,
            jobs: None,
            n_images: 2000,
            balance: None,
            band_tolerance: 0.02,
            paths: Paths::default(),
            annotate: AnnotateConfig::default(),
            synthesis: SynthesisConfig::default(),
            augmentation: AugmentationSpec::default(),
            export: ExportConfig::default(),
        }
    }
}

/// Settings given on the command line, applied over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub preset: Option<Preset>,
    pub balance: Option<bool>,
    pub n_images: Option<u64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub backgrounds: Option<PathBuf>,
    pub banks: Vec<(BankName, PathBuf)>,
    pub longest_side: Option<Option<u32>>,
    pub no_augment: bool,
}

impl RunConfig {
    /// Parses a config file. Unknown keys anywhere are rejected.
    pub fn from_json(text: &str, origin: &Path) -> Result<(Self, Option<u64>), CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))?;
        // a seed written under `synthesis` counts as given by the file too
        let raw: serde_json::Value = serde_json::from_str(text).expect("already parsed once");
        let nested = raw.pointer("/synthesis/seed").and_then(|v| v.as_u64());
        let file_seed = cfg.seed.or(nested);
        Ok((cfg, file_seed))
    }

    /// Loads the file (if any), applies overrides and the seed fallback
    /// chain, anchors paths at `root` and validates the result.
    pub fn resolve(
        root: &Path,
        file: Option<&Path>,
        overrides: Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, CliError> {
        let (mut cfg, file_seed) = match file {
            Some(p) => {
                let path = root.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                RunConfig::from_json(&text, &path)?
            }
            None => (RunConfig::default(), None),
        };

        let env_seed = match env_seed {
            Some(s) => Some(s.trim().parse::<u64>().map_err(|_| {
                CliError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))
            })?),
            None => None,
        };
        let seed = overrides.seed.or(file_seed).or(env_seed).unwrap_or(0);
        cfg.seed = Some(seed);
        cfg.synthesis.seed = seed;

        if overrides.jobs.is_some() {
            cfg.jobs = overrides.jobs;
        }
        if overrides.preset.is_some() {
            cfg.preset = overrides.preset;
        }
        if overrides.balance.is_some() {
            cfg.balance = overrides.balance;
        }
        if let Some(n) = overrides.n_images {
            cfg.n_images = n;
        }
        let p = &mut cfg.paths;
        for (slot, value) in [
            (&mut p.input, overrides.input),
            (&mut p.output, overrides.output),
            (&mut p.backgrounds, overrides.backgrounds),
        ] {
            if value.is_some() {
                *slot = value;
            }
        }
        for (name, path) in overrides.banks {
            p.banks.insert(name, path);
        }
        if let Some(side) = overrides.longest_side {
            cfg.export.longest_side = side;
        }
        if overrides.no_augment {
            cfg.export.augment = false;
        }

        for slot in [&mut p.input, &mut p.output, &mut p.backgrounds] {
            if let Some(v) = slot.as_mut() {
                *v = root.join(&*v);
            }
        }
        for v in p.banks.values_mut() {
            *v = root.join(&*v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.synthesis
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.augmentation
            .validate()
            .map_err(|e| CliError::Config(format!("augmentation: {e}")))?;
        self.annotate
            .validate()
            .map_err(|e| CliError::Config(format!("annotate: {e}")))?;
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if let Some(side) = self.export.longest_side {
            if side < 32 {
                return bad(format!(
                    "export.longest_side must be at least 32, got {side}"
                ));
            }
        }
        if !(0.0..1.0).contains(&self.band_tolerance) {
            return bad(format!(
                "band_tolerance must be in [0, 1), got {}",
                self.band_tolerance
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.classes {
            if c.is_empty() || c == bakesynth::UNKNOWN_CLASS {
                return bad(format!("class label {c:?} is reserved or empty"));
            }
            if !seen.insert(c) {
                return bad(format!("class label {c:?} listed twice"));
            }
        }
        Ok(())
    }

    /// Banks feeding the synthesis pool and the balancing switch, after
    /// preset and explicit settings are combined.
    pub fn pool_recipe(&self) -> Result<(Vec<(BankName, PathBuf)>, bool), CliError> {
        let (names, preset_balance): (Vec<BankName>, bool) = match self.preset {
            Some(p) => {
                let (names, b) = p.recipe();
                (names.to_vec(), b)
            }
            None => (self.paths.banks.keys().copied().collect(), false),
        };
        if names.is_empty() {
            return Err(CliError::Config(
                "no object banks configured; set paths.banks or pass --bank NAME=DIR".into(),
            ));
        }
        let mut out = Vec::new();
        for n in names {
            let path = self.paths.banks.get(&n).ok_or_else(|| {
                CliError::Config(format!(
                    "preset {:?} needs bank {n}; set paths.banks.{n} or pass --bank {n}=DIR",
                    self.preset
                        .expect("only presets name banks that may be missing")
                ))
            })?;
            out.push((n, path.clone()));
        }
        Ok((out, self.balance.unwrap_or(preset_balance)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The defaults as a config file. The nested synthesis seed is left out
    /// so a file started from this keeps the environment fallback working.
    pub fn defaults_json() -> String {
        let mut v = serde_json::to_value(RunConfig::default()).expect("config serializes");
        v["synthesis"]
            .as_object_mut()
            .expect("synthesis is an object")
            .remove("seed");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Parses `NAME=DIR` as given to `--bank`.
pub fn parse_bank_arg(s: &str) -> Result<(BankName, PathBuf), String> {
    let (name, dir) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=DIR, got {s:?}"))?;
    if dir.is_empty() {
        return Err(format!("empty directory in {s:?}"));
    }
    Ok((name.parse()?, PathBuf::from(dir)))
}
