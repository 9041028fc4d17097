//! Semi-automatic annotation of single-object images.
//!
//! An external promptable segmenter proposes candidate masks for each
//! captured image. The object mask is the biggest candidate that is not the
//! background, where a candidate counts as background when its bounding box
//! overlaps the full frame with an IoU above a threshold. The chosen mask is
//! cleaned with an opening followed by a closing, and the annotation box is
//! the tight box of its largest 8-connected component.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, LabeledImage, SourceTag};
use crate::error::{Error, Result};
use crate::geometry::{self, iou, BBox, BinaryMask, MorphOp, StructuringElement};

/// Reserved label for object types the detector should find but not name.
pub const UNKNOWN_CLASS: &str = "unknown";

/// Candidate masks proposed for one image. All candidates share the image dims.
#[derive(Debug, Clone)]
pub struct MaskCandidateSet {
    width: u32,
    height: u32,
    candidates: Vec<BinaryMask>,
}

impl MaskCandidateSet {
    pub fn new(width: u32, height: u32, candidates: Vec<BinaryMask>) -> Result<Self> {
        for c in &candidates {
            if c.dimensions() != (width, height) {
                return Err(Error::DimensionMismatch {
                    expected: (width, height),
                    actual: c.dimensions(),
                });
            }
        }
        Ok(MaskCandidateSet {
            width,
            height,
            candidates,
        })
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn candidates(&self) -> &[BinaryMask] {
        &self.candidates
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    Captured,
    Generated,
}

/// A tight image patch with its foreground mask; the unit of pasting.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectCrop {
    patch: RgbImage,
    mask: BinaryMask,
    pub class_label: String,
    pub source_id: String,
    pub origin: Origin,
}

impl ObjectCrop {
    /// Checks the crop invariants: matching dims, nonempty mask touching all
    /// four patch borders.
    pub fn new(
        patch: RgbImage,
        mask: BinaryMask,
        class_label: impl Into<String>,
        source_id: impl Into<String>,
        origin: Origin,
    ) -> Result<Self> {
        if patch.dimensions() != mask.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: patch.dimensions(),
                actual: mask.dimensions(),
            });
        }
        let tight = mask.tight_bbox().ok_or(Error::EmptyMask)?;
        if tight != BBox::full(mask.width(), mask.height()).expect("nonempty mask has area") {
            return Err(Error::Config(format!(
                "crop mask is not tight: foreground box {tight} in {}x{} patch",
                mask.width(),
                mask.height()
            )));
        }
        Ok(ObjectCrop {
            patch,
            mask,
            class_label: class_label.into(),
            source_id: source_id.into(),
            origin,
        })
    }

    /// Like [`new`](Self::new) but first trims `patch` and `mask` to the mask's tight box.
    pub fn tightened(
        patch: RgbImage,
        mask: BinaryMask,
        class_label: impl Into<String>,
        source_id: impl Into<String>,
        origin: Origin,
    ) -> Result<Self> {
        if patch.dimensions() != mask.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: patch.dimensions(),
                actual: mask.dimensions(),
            });
        }
        let tight = mask.tight_bbox().ok_or(Error::EmptyMask)?;
        let patch = crop_raster(&patch, &tight);
        let mask = mask.crop(&tight);
        ObjectCrop::new(patch, mask, class_label, source_id, origin)
    }

    /// Same object with a replacement patch of identical dims.
    pub fn with_patch(&self, patch: RgbImage) -> Result<Self> {
        if patch.dimensions() != self.patch.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: self.patch.dimensions(),
                actual: patch.dimensions(),
            });
        }
        Ok(ObjectCrop {
            patch,
            ..self.clone()
        })
    }

    pub fn patch(&self) -> &RgbImage {
        &self.patch
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn dimensions(&self) -> (u32, u32) {
        self.mask.dimensions()
    }

    /// The crop's annotation box in its own coordinates (the whole patch).
    pub fn bbox(&self) -> BBox {
        BBox::full(self.mask.width(), self.mask.height()).expect("crop is nonempty")
    }
}

pub(crate) fn crop_raster(img: &RgbImage, b: &BBox) -> RgbImage {
    image::imageops::crop_imm(img, b.x_min(), b.y_min(), b.width(), b.height()).to_image()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    pub background_iou_threshold: f64,
    pub refine_kernel: StructuringElement,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            background_iou_threshold: 0.9,
            refine_kernel: StructuringElement::square(2),
        }
    }
}

impl AnnotateConfig {
    pub fn validate(&self) -> Result<(), String> {
        let t = self.background_iou_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(format!(
                "background_iou_threshold must be in (0, 1], got {t}"
            ));
        }
        self.refine_kernel.validate()
    }
}

/// Biggest candidate whose tight box has IoU with the full frame at most
/// `background_iou_threshold`. Empty candidates never qualify.
pub fn select_object_mask(
    set: &MaskCandidateSet,
    background_iou_threshold: f64,
) -> Option<&BinaryMask> {
    let frame = BBox::full(set.width, set.height)?;
    set.candidates
        .iter()
        .filter_map(|m| {
            let b = m.tight_bbox()?;
            (iou(&b, &frame) <= background_iou_threshold).then(|| (m.foreground_count(), m))
        })
        // first candidate wins ties
        .fold(
            None,
            |best: Option<(usize, &BinaryMask)>, (n, m)| match best {
                Some((bn, _)) if bn >= n => best,
                _ => Some((n, m)),
            },
        )
        .map(|(_, m)| m)
}

/// Opening then closing with `k`.
pub fn refine_mask(m: &BinaryMask, k: &StructuringElement) -> Result<BinaryMask> {
    let opened = geometry::morph(m, MorphOp::Open, k);
    let refined = geometry::morph(&opened, MorphOp::Close, k);
    if refined.is_empty() {
        return Err(Error::EmptyAfterRefinement);
    }
    Ok(refined)
}

/// Box of the largest 8-connected component.
pub fn derive_annotation(m: &BinaryMask, class_label: &str) -> Result<Annotation> {
    let (component, _) = geometry::largest_component(m).ok_or(Error::EmptyMask)?;
    Ok(Annotation::new(class_label, component.bbox))
}

/// Full single-image annotation: select, refine, derive the box and cut the crop.
///
/// The crop keeps only the largest component of the refined mask, so stray
/// fragments inside the box are not pasted along with the object.
pub fn annotate_single_object_image(
    image: &RgbImage,
    candidates: &MaskCandidateSet,
    class_label: &str,
    source_id: &str,
    source: SourceTag,
    config: &AnnotateConfig,
) -> Result<(LabeledImage, ObjectCrop)> {
    if image.dimensions() != candidates.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: image.dimensions(),
            actual: candidates.dimensions(),
        });
    }
    let selected = select_object_mask(candidates, config.background_iou_threshold)
        .ok_or(Error::NoQualifyingMask)?;
    let refined = refine_mask(selected, &config.refine_kernel)?;
    let (component, only) = geometry::largest_component(&refined).ok_or(Error::EmptyMask)?;
    let bbox = component.bbox;

    let crop = ObjectCrop::new(
        crop_raster(image, &bbox),
        only.crop(&bbox),
        class_label,
        source_id,
        Origin::Captured,
    )?;
    let labeled = LabeledImage::new(
        image.clone(),
        vec![Annotation::new(class_label, bbox)],
        source,
    );
    Ok((labeled, crop))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(w: u32, h: u32, b: (u32, u32, u32, u32)) -> BinaryMask {
        let b = BBox::new(b.0, b.1, b.2, b.3).unwrap();
        BinaryMask::from_fn(w, h, |x, y| b.contains_pixel(x, y))
    }

    #[test]
    fn full_frame_candidate_is_background() {
        let set = MaskCandidateSet::new(20, 20, vec![BinaryMask::filled(20, 20)]).unwrap();
        assert!(select_object_mask(&set, 0.9).is_none());
    }

    #[test]
    fn centred_block_beats_background() {
        // block IoU with the frame is 100*100 / (1000*1000) = 0.01
        let obj = block(1000, 1000, (450, 450, 550, 550));
        let set = MaskCandidateSet::new(
            1000,
            1000,
            vec![BinaryMask::filled(1000, 1000), obj.clone()],
        )
        .unwrap();
        assert_eq!(select_object_mask(&set, 0.9), Some(&obj));
    }

    #[test]
    fn biggest_non_background_wins() {
        let small = block(100, 100, (10, 10, 30, 30)); // 400 px
        let big = block(100, 100, (50, 50, 80, 80)); // 900 px
        let set = MaskCandidateSet::new(100, 100, vec![small, big.clone()]).unwrap();
        assert_eq!(select_object_mask(&set, 0.9), Some(&big));
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        // 90x100 box in a 100x100 frame has IoU exactly 0.9
        let m = block(100, 100, (0, 0, 90, 100));
        let set = MaskCandidateSet::new(100, 100, vec![m]).unwrap();
        assert!(select_object_mask(&set, 0.9).is_some());
        assert!(select_object_mask(&set, 0.89).is_none());
    }

    #[test]
    fn mismatched_candidate_dims_rejected() {
        assert!(MaskCandidateSet::new(10, 10, vec![BinaryMask::new(10, 9)]).is_err());
    }

    #[test]
    fn refine_keeps_clean_block_and_drops_speckles() {
        let clean = block(80, 80, (15, 15, 65, 65));
        let k = StructuringElement::square(2);
        assert_eq!(refine_mask(&clean, &k).unwrap(), clean);

        let base = block(40, 40, (10, 10, 30, 30));
        let mut noisy = base.clone();
        for &(x, y) in &[(2, 2), (35, 5), (5, 36), (37, 37)] {
            noisy.set(x, y, true);
        }
        assert_eq!(
            refine_mask(&noisy, &StructuringElement::square(1)).unwrap(),
            base
        );
    }

    #[test]
    fn refine_empty_is_error() {
        let err = refine_mask(&BinaryMask::new(10, 10), &StructuringElement::square(1));
        assert!(matches!(err, Err(Error::EmptyAfterRefinement)));
    }

    #[test]
    fn derive_annotation_uses_largest_component() {
        let m = block(20, 20, (7, 7, 13, 13));
        assert_eq!(
            derive_annotation(&m, "a").unwrap().bbox,
            BBox::new(7, 7, 13, 13).unwrap()
        );

        let mut two = block(30, 30, (1, 1, 5, 5));
        for (x, y) in [(20, 20), (21, 20), (20, 21), (21, 21)] {
            two.set(x, y, true);
        }
        assert_eq!(
            derive_annotation(&two, "a").unwrap().bbox,
            BBox::new(1, 1, 5, 5).unwrap()
        );

        assert!(derive_annotation(&BinaryMask::new(5, 5), "a").is_err());
    }

    #[test]
    fn annotate_rejects_empty_and_background_only_sets() {
        let img = RgbImage::new(30, 30);
        let cfg = AnnotateConfig::default();
        let empty = MaskCandidateSet::new(30, 30, vec![]).unwrap();
        assert!(matches!(
            annotate_single_object_image(&img, &empty, "a", "x", SourceTag::TrainB, &cfg),
            Err(Error::NoQualifyingMask)
        ));
        let bg = MaskCandidateSet::new(30, 30, vec![BinaryMask::filled(30, 30)]).unwrap();
        assert!(matches!(
            annotate_single_object_image(&img, &bg, "a", "x", SourceTag::TrainB, &cfg),
            Err(Error::NoQualifyingMask)
        ));
    }

    #[test]
    fn crop_invariants_enforced() {
        let patch = RgbImage::new(4, 4);
        assert!(ObjectCrop::new(
            patch.clone(),
            BinaryMask::new(4, 4),
            "a",
            "x",
            Origin::Captured
        )
        .is_err());
        let mut loose = BinaryMask::new(4, 4);
        loose.set(1, 1, true);
        assert!(ObjectCrop::new(patch.clone(), loose.clone(), "a", "x", Origin::Captured).is_err());
        let c = ObjectCrop::tightened(patch, loose, "a", "x", Origin::Captured).unwrap();
        assert_eq!(c.dimensions(), (1, 1));
    }
}
