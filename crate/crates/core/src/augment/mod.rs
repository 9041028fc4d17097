//! Seeded image transforms.
//!
//! Two groups live here: crop-level transforms applied to objects right
//! before they are pasted ([`crop`]), and whole-image transforms chained by
//! the online pipeline ([`pipeline::dp_pipeline`]). Every random choice is
//! drawn from an explicit [`RngStream`](crate::rng::RngStream).

pub mod crop;
pub mod pipeline;
pub mod pixel;
pub mod spatial;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crop::{rotate_crop, scale_crop};
pub use pipeline::{dp_pipeline, DpOutcome, DpStage};
pub use pixel::{clahe, pixel_transform, ClaheParams, PixelTransform};
pub use spatial::{spatial_transform, SpatialTransform};

/// Inclusive `[min, max]` parameter range, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct ParamRange<T: Copy> {
    pub min: T,
    pub max: T,
}

impl<T: Copy> ParamRange<T> {
    pub const fn new(min: T, max: T) -> Self {
        ParamRange { min, max }
    }
}

impl<T: Copy> From<[T; 2]> for ParamRange<T> {
    fn from(v: [T; 2]) -> Self {
        ParamRange {
            min: v[0],
            max: v[1],
        }
    }
}

impl<T: Copy> From<ParamRange<T>> for [T; 2] {
    fn from(r: ParamRange<T>) -> Self {
        [r.min, r.max]
    }
}

impl ParamRange<f64> {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..=self.max)
        }
    }

    fn check(&self, name: &str) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(format!("{name}: empty range [{}, {}]", self.min, self.max));
        }
        Ok(())
    }
}

impl ParamRange<u32> {
    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        rng.gen_range(self.min..=self.max)
    }

    fn check(&self, name: &str) -> Result<(), String> {
        if self.min > self.max {
            return Err(format!("{name}: empty range [{}, {}]", self.min, self.max));
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), String> {
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("{name} must be in [0, 1], got {p}"));
    }
    Ok(())
}

fn check_kernels(name: &str, kernels: &[u32]) -> Result<(), String> {
    if kernels.is_empty() {
        return Err(format!("{name}: at least one kernel size is required"));
    }
    if let Some(k) = kernels.iter().find(|k| **k == 0 || **k % 2 == 0) {
        return Err(format!(
            "{name}: kernel sizes must be odd and positive, got {k}"
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseDropoutParams {
    pub holes: ParamRange<u32>,
    /// Hole side length as a fraction of the corresponding image side.
    pub hole_size_fraction: ParamRange<f64>,
    pub fill: u8,
}

impl Default for CoarseDropoutParams {
    fn default() -> Self {
        CoarseDropoutParams {
            holes: ParamRange::new(1, 8),
            hole_size_fraction: ParamRange::new(0.02, 0.1),
            fill: 0,
        }
    }
}

/// Parameters of the sequential online pipeline: four spatial transforms,
/// then four pixel transforms, each gated by its group's probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationSpec {
    pub spatial_probability: f64,
    pub pixel_probability: f64,
    pub coarse_dropout: CoarseDropoutParams,
    /// Per-pixel drop probability once pixel dropout fires.
    pub pixel_dropout_rate: f64,
    pub scale_range: ParamRange<f64>,
    pub rotate_degrees: ParamRange<f64>,
    pub blur_kernels: Vec<u32>,
    pub median_kernels: Vec<u32>,
    pub clahe: ClaheParams,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        AugmentationSpec {
            spatial_probability: 0.01,
            pixel_probability: 0.04,
            coarse_dropout: CoarseDropoutParams::default(),
            pixel_dropout_rate: 0.01,
            scale_range: ParamRange::new(0.9, 1.1),
            rotate_degrees: ParamRange::new(-10.0, 10.0),
            blur_kernels: vec![3, 5, 7],
            median_kernels: vec![3, 5, 7],
            clahe: ClaheParams::default(),
        }
    }
}

impl AugmentationSpec {
    /// Default parameters with the two gate probabilities replaced.
    pub fn with_probabilities(spatial: f64, pixel: f64) -> Self {
        AugmentationSpec {
            spatial_probability: spatial,
            pixel_probability: pixel,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        check_probability("spatial_probability", self.spatial_probability)?;
        check_probability("pixel_probability", self.pixel_probability)?;
        check_probability("pixel_dropout_rate", self.pixel_dropout_rate)?;
        self.coarse_dropout.holes.check("coarse_dropout.holes")?;
        self.coarse_dropout
            .hole_size_fraction
            .check("coarse_dropout.hole_size_fraction")?;
        let hs = self.coarse_dropout.hole_size_fraction;
        if hs.min <= 0.0 || hs.max > 1.0 {
            return Err("coarse_dropout.hole_size_fraction must lie in (0, 1]".into());
        }
        self.scale_range.check("scale_range")?;
        if self.scale_range.min <= 0.0 {
            return Err("scale_range must be positive".into());
        }
        self.rotate_degrees.check("rotate_degrees")?;
        check_kernels("blur_kernels", &self.blur_kernels)?;
        check_kernels("median_kernels", &self.median_kernels)?;
        self.clahe.validate()
    }
}

/// Transforms applied to each object just before it is pasted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PasteAugmentation {
    pub rotation_probability: f64,
    pub rotation_degrees: ParamRange<f64>,
    pub scale_probability: f64,
    pub scale_range: ParamRange<f64>,
    pub blur_probability: f64,
    pub blur_kernels: Vec<u32>,
    pub clahe_probability: f64,
    pub clahe: ClaheParams,
}

impl Default for PasteAugmentation {
    fn default() -> Self {
        PasteAugmentation {
            rotation_probability: 1.0,
            rotation_degrees: ParamRange::new(-180.0, 180.0),
            scale_probability: 1.0,
            scale_range: ParamRange::new(0.75, 1.25),
            blur_probability: 0.1,
            blur_kernels: vec![3, 5],
            clahe_probability: 0.2,
            clahe: ClaheParams::default(),
        }
    }
}

impl PasteAugmentation {
    /// No-op augmentation, mostly for tests.
    pub fn none() -> Self {
        PasteAugmentation {
            rotation_probability: 0.0,
            scale_probability: 0.0,
            blur_probability: 0.0,
            clahe_probability: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        check_probability("rotation_probability", self.rotation_probability)?;
        check_probability("scale_probability", self.scale_probability)?;
        check_probability("blur_probability", self.blur_probability)?;
        check_probability("clahe_probability", self.clahe_probability)?;
        self.rotation_degrees.check("rotation_degrees")?;
        self.scale_range.check("scale_range")?;
        if self.scale_range.min <= 0.0 {
            return Err("scale_range must be positive".into());
        }
        check_kernels("blur_kernels", &self.blur_kernels)?;
        self.clahe.validate()
    }
}
