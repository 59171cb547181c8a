//! Gabor filter bank and per-pixel texture features.

mod bank;
mod features;
mod stats;

pub use bank::{build_filter_bank, FilterBank, GaborConfig, GaborFilter, SIGMA_PER_WAVELENGTH};
pub use features::{channel_image, convolve_response, extract_features, FeatureGrid};
pub use stats::{fit_stats, FeatureStats, STD_FLOOR};
