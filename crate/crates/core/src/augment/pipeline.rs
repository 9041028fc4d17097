use image::RgbImage;
use rand::Rng;
use serde::Serialize;

use super::pixel::{pixel_transform, PixelTransform};
use super::spatial::{spatial_transform, SpatialTransform};
use super::AugmentationSpec;
use crate::dataset::Annotation;
use crate::rng::RngStream;

/// Stages of the online pipeline, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DpStage {
    CoarseDropout,
    PixelDropout,
    Scale,
    Rotate,
    Blur,
    MedianBlur,
    ToGray,
    Clahe,
}

impl DpStage {
    pub const ALL: [DpStage; 8] = [
        DpStage::CoarseDropout,
        DpStage::PixelDropout,
        DpStage::Scale,
        DpStage::Rotate,
        DpStage::Blur,
        DpStage::MedianBlur,
        DpStage::ToGray,
        DpStage::Clahe,
    ];

    pub fn is_spatial(self) -> bool {
        matches!(
            self,
            DpStage::CoarseDropout | DpStage::PixelDropout | DpStage::Scale | DpStage::Rotate
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            DpStage::CoarseDropout => "coarse_dropout",
            DpStage::PixelDropout => "pixel_dropout",
            DpStage::Scale => "scale",
            DpStage::Rotate => "rotate",
            DpStage::Blur => "blur",
            DpStage::MedianBlur => "median_blur",
            DpStage::ToGray => "to_gray",
            DpStage::Clahe => "clahe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpOutcome {
    pub image: RgbImage,
    pub annotations: Vec<Annotation>,
    /// Stages that fired, in order.
    pub fired: Vec<DpStage>,
}

/// Runs the eight stages in order, each gated by its group probability.
///
/// Gate decisions come from `stream/"decide"`, one draw per stage whether it
/// fires or not; each stage's parameters come from its own child stream.
pub fn dp_pipeline(
    img: &RgbImage,
    annotations: &[Annotation],
    spec: &AugmentationSpec,
    stream: &RngStream,
) -> DpOutcome {
    let mut decide = stream.derive("decide").rng();
    let mut image = img.clone();
    let mut anns = annotations.to_vec();
    let mut fired = Vec::new();

    for stage in DpStage::ALL {
        let p = if stage.is_spatial() {
            spec.spatial_probability
        } else {
            spec.pixel_probability
        };
        if decide.gen::<f64>() >= p {
            continue;
        }
        fired.push(stage);
        let mut rng = stream.derive(stage.name()).rng();
        if stage.is_spatial() {
            let t = match stage {
                DpStage::CoarseDropout => {
                    SpatialTransform::CoarseDropout(spec.coarse_dropout.clone())
                }
                DpStage::PixelDropout => SpatialTransform::PixelDropout {
                    rate: spec.pixel_dropout_rate,
                },
                DpStage::Scale => SpatialTransform::Scale {
                    factor: spec.scale_range.sample(&mut rng),
                },
                _ => SpatialTransform::Rotate {
                    degrees: spec.rotate_degrees.sample(&mut rng),
                },
            };
            let (i, a) = spatial_transform(&image, &anns, &t, &mut rng);
            image = i;
            anns = a;
        } else {
            let t = match stage {
                DpStage::Blur => PixelTransform::Blur {
                    kernel: spec.blur_kernels[rng.gen_range(0..spec.blur_kernels.len())],
                },
                DpStage::MedianBlur => PixelTransform::MedianBlur {
                    kernel: spec.median_kernels[rng.gen_range(0..spec.median_kernels.len())],
                },
                DpStage::ToGray => PixelTransform::ToGray,
                _ => PixelTransform::Clahe(spec.clahe),
            };
            image = pixel_transform(&image, &t);
        }
    }

    DpOutcome {
        image,
        annotations: anns,
        fired,
    }
}
