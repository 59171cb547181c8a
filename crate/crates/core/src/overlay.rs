//! Color rendering of label maps.

use std::path::Path;

use crate::dataset_io::{save_rgb_png, GrayImage, LabelMap};
use crate::error::{Error, Result};
use crate::tissue::Tissue;

/// Fixed display color per tissue.
pub fn palette(tissue: Tissue) -> [u8; 3] {
    match tissue {
        Tissue::Background => [0, 0, 0],
        Tissue::Skull => [255, 255, 0],
        Tissue::Csf => [0, 0, 255],
        Tissue::GrayMatter => [128, 128, 128],
        Tissue::WhiteMatter => [255, 255, 255],
    }
}

/// Interleaved RGB bytes, one palette color per pixel.
pub fn colorize(labels: &LabelMap) -> Vec<u8> {
    labels.labels().iter().flat_map(|t| palette(*t)).collect()
}

/// Palette colors blended with the grayscale image; `opacity` is the
/// weight of the label color.
pub fn blend(image: &GrayImage, labels: &LabelMap, opacity: f64) -> Result<Vec<u8>> {
    if image.dims() != labels.dims() {
        return Err(Error::DimensionMismatch {
            expected: image.dims(),
            found: labels.dims(),
        });
    }
    let a = opacity.clamp(0.0, 1.0);
    Ok(image
        .pixels()
        .iter()
        .zip(labels.labels())
        .flat_map(|(&g, t)| palette(*t).map(|c| (a * c as f64 + (1.0 - a) * g as f64).round() as u8))
        .collect())
}

pub fn save_overlay(labels: &LabelMap, path: &Path) -> Result<()> {
    save_rgb_png(labels.width(), labels.height(), &colorize(labels), path)
}
