//! Synthetic head phantoms with exact ground truth.
//!
//! The head is a set of nested ellipses: background outside, then a skull
//! ring, a CSF ring, a gray-matter ring and a white-matter core. Each tissue
//! carries an optional oriented sinusoidal texture on top of its mean
//! intensity, followed by additive Gaussian noise. Intensities are rounded
//! half-to-even and clamped to `[0, 255]`.
//!
//! Random draws, all from one [`Rng`] stream seeded with `config.seed`, in
//! this order:
//!
//! 1. seven uniforms in `[-j, j)` (`j = ellipse_jitter`): semi-axis `a`,
//!    semi-axis `b`, center `x`, center `y`, then the CSF, gray-matter and
//!    white-matter boundary radii;
//! 2. five texture phases in `[0, 2π)`, one per tissue in code order, drawn
//!    whether or not the tissue is textured;
//! 3. Gaussian noise, pixels in row-major order, consuming both outputs of
//!    each Box–Muller pair. Nothing is drawn when `noise_sigma == 0`.

use serde::{Deserialize, Serialize};

use super::image::{GrayImage, LabelMap};
use super::manifest::LabeledImage;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};
use crate::tissue::{PerTissue, Tissue};

/// Semi-axes of the outer (skull) ellipse as fractions of the image size.
const HEAD_SEMI_AXES: (f64, f64) = (0.42, 0.36);
/// Outer boundary of the CSF, gray-matter and white-matter regions, as
/// normalized elliptical radii (the skull boundary is 1.0).
const INNER_RADII: [f64; 3] = [0.78, 0.56, 0.30];
/// Center displacement per unit of jitter, as a fraction of the image size.
const CENTER_SHIFT: f64 = 0.2;
const MIN_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    /// Cycles per pixel.
    pub frequency: f64,
    pub orientation_deg: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomConfig {
    pub size: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub tissue_means: PerTissue<f64>,
    pub ellipse_jitter: f64,
    pub textures: PerTissue<Option<Texture>>,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        let tex = |frequency, orientation_deg| {
            Some(Texture {
                frequency,
                orientation_deg,
                amplitude: 40.0,
            })
        };
        PhantomConfig {
            size: 128,
            noise_sigma: 10.0,
            seed: 0,
            tissue_means: PerTissue {
                background: 10.0,
                skull: 220.0,
                csf: 60.0,
                gray_matter: 120.0,
                white_matter: 180.0,
            },
            ellipse_jitter: 0.1,
            textures: PerTissue {
                background: None,
                skull: tex(0.4, 0.0),
                csf: tex(0.2, 60.0),
                gray_matter: tex(0.4, 120.0),
                white_matter: tex(0.2, 120.0),
            },
        }
    }
}

impl PhantomConfig {
    /// Same geometry and intensities with all textures removed.
    pub fn untextured(mut self) -> Self {
        self.textures = PerTissue::default();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.size < MIN_SIZE {
            return bad(format!("phantom size must be at least {MIN_SIZE}"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be finite and non-negative".into());
        }
        if !(0.0..=0.2).contains(&self.ellipse_jitter) {
            return bad("ellipse_jitter must lie in [0, 0.2]".into());
        }
        for (a, ma) in self.tissue_means.iter() {
            if !ma.is_finite() {
                return bad(format!("mean intensity of {a} is not finite"));
            }
            for (b, mb) in self.tissue_means.iter() {
                if a < b && ma == mb {
                    return bad(format!("tissue means of {a} and {b} coincide"));
                }
            }
        }
        for (t, tex) in self.textures.iter() {
            if let Some(tex) = tex {
                if !(tex.frequency.is_finite()
                    && tex.orientation_deg.is_finite()
                    && tex.amplitude.is_finite()
                    && tex.amplitude >= 0.0)
                {
                    return bad(format!("texture of {t} has invalid parameters"));
                }
            }
        }
        Ok(())
    }
}

/// Renders one phantom image and its label map.
pub fn generate_phantom(config: &PhantomConfig) -> Result<(GrayImage, LabelMap)> {
    config.validate()?;
    let n = config.size;
    let j = config.ellipse_jitter;
    let mut rng = Rng::new(config.seed);
    let mut jitter = || rng.uniform_range(-j, j);

    let a = HEAD_SEMI_AXES.0 * n as f64 * (1.0 + jitter());
    let b = HEAD_SEMI_AXES.1 * n as f64 * (1.0 + jitter());
    let center = (n as f64 - 1.0) / 2.0;
    let cx = center + jitter() * CENTER_SHIFT * n as f64;
    let cy = center + jitter() * CENTER_SHIFT * n as f64;
    let mut radii = [1.0; 4];
    for (r, base) in radii[1..].iter_mut().zip(INNER_RADII) {
        *r = base * (1.0 + 0.5 * jitter());
    }
    let phases: [f64; 5] = std::array::from_fn(|_| rng.uniform_range(0.0, std::f64::consts::TAU));

    let mut labels = Vec::with_capacity(n * n);
    let mut values = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let (fx, fy) = (x as f64, y as f64);
            let dx = (fx - cx) / a;
            let dy = (fy - cy) / b;
            let r = (dx * dx + dy * dy).sqrt();
            let tissue = match radii.iter().rposition(|&bound| r <= bound) {
                Some(depth) => Tissue::ALL[depth + 1],
                None => Tissue::Background,
            };
            let mut v = config.tissue_means[tissue];
            if let Some(tex) = config.textures[tissue] {
                let theta = tex.orientation_deg.to_radians();
                let along = fx * theta.cos() + fy * theta.sin();
                v += tex.amplitude
                    * (std::f64::consts::TAU * tex.frequency * along + phases[tissue.index()]).cos();
            }
            labels.push(tissue);
            values.push(v);
        }
    }

    if config.noise_sigma > 0.0 {
        let mut pairs = values.chunks_mut(2);
        for pair in &mut pairs {
            let (z0, z1) = rng.gaussian_pair();
            pair[0] += config.noise_sigma * z0;
            if let Some(second) = pair.get_mut(1) {
                *second += config.noise_sigma * z1;
            }
        }
    }

    let pixels = values
        .into_iter()
        .map(|v| v.round_ties_even().clamp(0.0, 255.0) as u8)
        .collect();
    let image = GrayImage::new(n, n, pixels)?;
    let labels = LabelMap::new(n, n, labels)?;
    if let Some(missing) = Tissue::ALL
        .into_iter()
        .find(|t| labels.histogram()[t.index()] == 0)
    {
        return Err(Error::InvalidConfig(format!(
            "phantom geometry lost tissue {missing}"
        )));
    }
    Ok((image, labels))
}

/// Seed of the `index`-th phantom in a suite built from `config`.
pub fn phantom_seed(config: &PhantomConfig, index: usize) -> u64 {
    derive_seed(config.seed, index as u64)
}

/// `count` phantoms with ids `phantom_00`, `phantom_01`, ...; image `i`
/// uses [`phantom_seed`]`(config, i)`.
pub fn phantom_suite(count: usize, config: &PhantomConfig) -> Result<Vec<LabeledImage>> {
    if count == 0 {
        return Err(Error::InvalidConfig("phantom count must be at least 1".into()));
    }
    (0..count)
        .map(|i| {
            let cfg = PhantomConfig {
                seed: phantom_seed(config, i),
                ..config.clone()
            };
            let (image, labels) = generate_phantom(&cfg)?;
            LabeledImage::new(phantom_id(i), image, labels)
        })
        .collect()
}

pub fn phantom_id(index: usize) -> String {
    format!("phantom_{index:02}")
}
