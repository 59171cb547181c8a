//! Brain MR tissue segmentation from Gabor texture features.
//!
//! The pipeline turns each grayscale image into a 9-dimensional feature
//! grid ([`gabor`]), trains one of four pixel classifiers on balanced
//! samples ([`classifiers`]), scores segmentations per tissue with
//! leave-one-out cross-validation ([`evaluation`]) and fuses the four
//! classifiers through a per-tissue rule table ([`hybrid`]).

pub mod classifiers;
pub mod dataset_io;
pub mod error;
pub mod evaluation;
pub mod fsutil;
pub mod gabor;
pub mod hybrid;
pub mod overlay;
pub mod rng;
pub mod tissue;

pub use error::{Error, Result};
pub use tissue::{PerTissue, Tissue, NUM_TISSUES};

/// Width of every feature vector.
pub const FEATURE_DIM: usize = 9;

pub type FeatureVector = [f64; FEATURE_DIM];
