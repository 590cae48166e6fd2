//! Winter-road vision pipelines: a conditional-GAN night-to-day translator,
//! a six-class road-scene segmenter, ROI-restricted Dice evaluation, and the
//! snow hazard ratio index, plus a synthetic paired-scene generator that
//! makes the whole system trainable and measurable at desk scale.
//!
//! Pipeline overview:
//!
//! 1. `translator` — pix2pix-style L1-conditional GAN, instantiable as the
//!    night-to-day network or the snow-removal network.
//! 2. `segmenter` — DeepLabv3+-style encoder/decoder over a MobileNet-style
//!    backbone, six classes.
//! 3. `metrics` — confusion-matrix scores and Dice similarity between real
//!    and fake day labels.
//! 4. `hazard` — the snow-over-road ROI and the 0..100 coverage index,
//!    composable from night frames via the translator.
//! 5. `synthfix` — procedural road scenes with exact ground-truth labels.

pub mod codec;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod raster;
pub mod taxonomy;

pub use error::{Error, Result};
pub use raster::{class_mask, mask_intersection, overlay, LabelMap, PixelMask, PixelRange, RgbImage};
pub use taxonomy::{Class, ClassTaxonomy, NUM_CLASSES};
