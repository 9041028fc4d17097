//! Synthetic object-detection datasets from segmented single-object images.
//!
//! The flow is: derive a mask and box for each single-object photo
//! ([`annotate`]), collect the crops into an [`ObjectBank`], then paste
//! balanced, scale-clamped crops onto mosaic backgrounds without overlap
//! ([`compose`]). [`augment`] holds the transforms and [`dataset`] the file
//! formats and statistics.

pub mod annotate;
pub mod augment;
pub mod compose;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod rng;

pub use annotate::{
    annotate_single_object_image, AnnotateConfig, MaskCandidateSet, ObjectCrop, Origin,
    UNKNOWN_CLASS,
};
pub use augment::{AugmentationSpec, PasteAugmentation};
pub use compose::{ObjectBank, SynthesisConfig, SynthesisManifest};
pub use dataset::{Annotation, LabeledImage, SourceTag};
pub use error::{Error, Result};
pub use geometry::{iou, BBox, BinaryMask, StructuringElement};
pub use rng::RngStream;
