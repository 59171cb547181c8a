use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tissue::Tissue;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }
}

/// Per-pixel tissue labeling, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<Tissue>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<Tissue>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: usize, height: usize, tissue: Tissue) -> Result<Self> {
        LabelMap::new(width, height, vec![tissue; width * height])
    }

    /// Builds a map from raw codes, rejecting anything outside 0–4.
    pub fn from_codes(width: usize, height: usize, codes: &[u8]) -> Result<Self> {
        check_dims(width, height, codes.len())?;
        let labels = codes
            .iter()
            .enumerate()
            .map(|(i, &value)| {
                Tissue::from_code(value).ok_or(Error::OutOfRangeLabel {
                    value,
                    x: i % width,
                    y: i / width,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[Tissue] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [Tissue] {
        &mut self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Tissue {
        self.labels[y * self.width + x]
    }

    pub fn codes(&self) -> Vec<u8> {
        self.labels.iter().map(|t| t.code()).collect()
    }

    /// Pixel count per tissue, indexed by tissue code.
    pub fn histogram(&self) -> [usize; 5] {
        let mut h = [0usize; 5];
        for t in &self.labels {
            h[t.index()] += 1;
        }
        h
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidConfig(format!(
            "{len} values do not fill a {width}x{height} grid"
        )));
    }
    Ok(())
}
