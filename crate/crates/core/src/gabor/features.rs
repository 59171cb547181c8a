use rayon::prelude::*;

use super::bank::{FilterBank, GaborFilter};
use crate::dataset_io::GrayImage;
use crate::error::{Error, Result};
use crate::{FeatureVector, FEATURE_DIM};

/// Per-pixel feature vectors of one image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    width: usize,
    height: usize,
    values: Vec<FeatureVector>,
}

impl FeatureGrid {
    pub fn new(width: usize, height: usize, values: Vec<FeatureVector>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidConfig(format!(
                "{} feature vectors do not fill a {width}x{height} grid",
                values.len()
            )));
        }
        Ok(FeatureGrid {
            width,
            height,
            values,
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

    pub fn dim(&self) -> usize {
        FEATURE_DIM
    }

    pub fn values(&self) -> &[FeatureVector] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [FeatureVector] {
        &mut self.values
    }

    pub fn get(&self, x: usize, y: usize) -> &FeatureVector {
        &self.values[y * self.width + x]
    }

    /// One feature dimension as a row-major plane.
    pub fn channel(&self, d: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[d]).collect()
    }
}

/// Magnitude of the complex correlation of `image` with `filter`, using
/// clamp-to-edge borders. Within a pixel the kernel is traversed row-major.
pub fn convolve_response(image: &GrayImage, filter: &GaborFilter) -> Vec<f64> {
    let (w, h) = image.dims();
    let r = filter.radius;
    let side = filter.side();
    let pw = w + 2 * r;
    // replicate-padded copy so the inner loop needs no bounds logic
    let mut padded = Vec::with_capacity(pw * (h + 2 * r));
    for py in 0..h + 2 * r {
        let y = py.saturating_sub(r).min(h - 1);
        for px in 0..pw {
            let x = px.saturating_sub(r).min(w - 1);
            padded.push(f64::from(image.get(x, y)));
        }
    }

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for ky in 0..side {
                let base = (y + ky) * pw + x;
                let src = &padded[base..base + side];
                let kre = &filter.real[ky * side..(ky + 1) * side];
                let kim = &filter.imag[ky * side..(ky + 1) * side];
                for ((v, a), b) in src.iter().zip(kre).zip(kim) {
                    re += v * a;
                    im += v * b;
                }
            }
            *slot = (re * re + im * im).sqrt();
        }
    });
    out
}

/// Stacks the responses of every filter in `bank` into a feature grid.
pub fn extract_features(image: &GrayImage, bank: &FilterBank) -> Result<FeatureGrid> {
    let filters = bank.filters();
    if filters.len() != FEATURE_DIM {
        return Err(Error::InvalidConfig(format!(
            "filter bank has {} filters, expected {FEATURE_DIM}",
            filters.len()
        )));
    }
    let responses: Vec<Vec<f64>> = filters
        .iter()
        .map(|f| convolve_response(image, f))
        .collect();
    let values = (0..image.width() * image.height())
        .map(|p| std::array::from_fn(|d| responses[d][p]))
        .collect();
    FeatureGrid::new(image.width(), image.height(), values)
}

/// One channel rescaled to 0..=255 by its own minimum and maximum, for
/// viewing. A flat channel maps to 0.
pub fn channel_image(grid: &FeatureGrid, d: usize) -> Result<GrayImage> {
    let values = grid.channel(d);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pixels = values
        .iter()
        .map(|v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    GrayImage::new(grid.width(), grid.height(), pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::{build_filter_bank, GaborConfig};

    #[test]
    fn channel_image_spans_full_range() {
        let values = (0..4).map(|i| [i as f64; FEATURE_DIM]).collect();
        let grid = FeatureGrid::new(2, 2, values).unwrap();
        assert_eq!(channel_image(&grid, 3).unwrap().pixels(), &[0, 85, 170, 255]);
        let flat = FeatureGrid::new(1, 2, vec![[1.0; FEATURE_DIM]; 2]).unwrap();
        assert_eq!(channel_image(&flat, 0).unwrap().pixels(), &[0, 0]);
    }

    #[test]
    fn output_matches_input_dimensions() {
        let img = GrayImage::new(7, 3, (0..21).collect()).unwrap();
        let f = GaborFilter::new(0.2, 0.3, 2.8, 0.5, 9);
        assert_eq!(convolve_response(&img, &f).len(), 21);
    }

    #[test]
    fn constant_image_gives_near_zero() {
        let img = GrayImage::filled(20, 20, 200).unwrap();
        let bank = build_filter_bank(&GaborConfig::default()).unwrap();
        let grid = extract_features(&img, &bank).unwrap();
        for v in grid.values() {
            for c in v {
                assert!(c.abs() < 1e-6 * 255.0, "{c}");
            }
        }
    }

    #[test]
    fn one_pixel_image() {
        let img = GrayImage::filled(1, 1, 5).unwrap();
        let bank = build_filter_bank(&GaborConfig::default()).unwrap();
        let grid = extract_features(&img, &bank).unwrap();
        assert_eq!(grid.values().len(), 1);
        assert!(grid.values()[0].iter().all(|v| v.is_finite()));
    }
}
