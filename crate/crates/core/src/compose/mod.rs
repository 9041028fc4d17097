//! Copy-paste composition: pool balancing, scale clamping, free-spot
//! placement over mosaic backgrounds.

pub mod bank;
pub mod mosaic;
pub mod placement;
pub mod scale;
pub mod synth;

pub use bank::{balance_pool, duplication_factors, ObjectBank};
pub use mosaic::{mosaic_background, sample_split};
pub use placement::{find_free_spot, OccupancyMask, RowRuns};
pub use scale::{area_fraction, clamp_object_scale};
pub use synth::{
    image_stem, synthesize_dataset, synthesize_image, PastedObject, Synthesis, SynthesisConfig,
    SynthesisManifest, SYNTH_MANIFEST,
};
