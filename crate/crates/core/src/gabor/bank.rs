use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::FEATURE_DIM;

/// Envelope width per unit wavelength for a one-octave bandwidth filter.
pub const SIGMA_PER_WAVELENGTH: f64 = 0.56;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaborConfig {
    /// Spatial frequencies in cycles per pixel.
    pub frequencies: Vec<f64>,
    /// Orientations in radians.
    pub orientations: Vec<f64>,
    /// Fixed envelope standard deviation. `None` uses
    /// `SIGMA_PER_WAVELENGTH / f` for each frequency.
    pub sigma_envelope: Option<f64>,
    /// Fixed kernel radius. `None` uses `ceil(3 sigma)` per filter.
    pub kernel_radius: Option<usize>,
    pub gamma_aspect: f64,
}

impl Default for GaborConfig {
    fn default() -> Self {
        GaborConfig {
            frequencies: vec![0.1, 0.2, 0.4],
            orientations: vec![0.0, PI / 3.0, 2.0 * PI / 3.0],
            sigma_envelope: None,
            kernel_radius: None,
            gamma_aspect: 0.5,
        }
    }
}

impl GaborConfig {
    pub fn sigma_for(&self, frequency: f64) -> f64 {
        self.sigma_envelope
            .unwrap_or(SIGMA_PER_WAVELENGTH / frequency)
    }

    pub fn radius_for(&self, frequency: f64) -> usize {
        let min = min_radius(self.sigma_for(frequency));
        self.kernel_radius.unwrap_or(min)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let count = self.frequencies.len() * self.orientations.len();
        if count != FEATURE_DIM {
            return bad(format!(
                "{} frequencies x {} orientations = {count} filters, expected {FEATURE_DIM}",
                self.frequencies.len(),
                self.orientations.len()
            ));
        }
        if let Some(f) = self
            .frequencies
            .iter()
            .find(|f| !(**f > 0.0 && **f <= 0.5))
        {
            return bad(format!("frequency {f} outside (0, 0.5]"));
        }
        if self.orientations.iter().any(|o| !o.is_finite()) {
            return bad("orientations must be finite".into());
        }
        if !(self.gamma_aspect.is_finite() && self.gamma_aspect > 0.0) {
            return bad("gamma_aspect must be positive".into());
        }
        for &f in &self.frequencies {
            let sigma = self.sigma_for(f);
            if !(sigma.is_finite() && sigma > 0.0) {
                return bad(format!("envelope sigma {sigma} must be positive"));
            }
            let r = self.radius_for(f);
            if r < min_radius(sigma) {
                return bad(format!(
                    "kernel radius {r} below ceil(3 sigma) = {}",
                    min_radius(sigma)
                ));
            }
        }
        Ok(())
    }
}

fn min_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// Complex Gabor filter sampled on `[-r, r]^2`, row-major with `y` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborFilter {
    pub frequency: f64,
    pub orientation: f64,
    pub sigma: f64,
    pub radius: usize,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl GaborFilter {
    /// Samples `exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * (cos, sin)(2 pi f x')`,
    /// subtracts the mean of the real part and scales both parts to unit L2 norm.
    pub fn new(frequency: f64, orientation: f64, sigma: f64, gamma: f64, radius: usize) -> Self {
        let r = radius as isize;
        let side = 2 * radius + 1;
        let (sin_t, cos_t) = orientation.sin_cos();
        let mut real = Vec::with_capacity(side * side);
        let mut imag = Vec::with_capacity(side * side);
        for y in -r..=r {
            for x in -r..=r {
                let (x, y) = (x as f64, y as f64);
                let xr = x * cos_t + y * sin_t;
                let yr = -x * sin_t + y * cos_t;
                let envelope = (-(xr * xr + gamma * gamma * yr * yr) / (2.0 * sigma * sigma)).exp();
                let phase = TAU * frequency * xr;
                real.push(envelope * phase.cos());
                imag.push(envelope * phase.sin());
            }
        }
        let mean = real.iter().sum::<f64>() / real.len() as f64;
        real.iter_mut().for_each(|v| *v -= mean);
        normalize_l2(&mut real);
        normalize_l2(&mut imag);
        GaborFilter {
            frequency,
            orientation,
            sigma,
            radius,
            real,
            imag,
        }
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Coefficients at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> (f64, f64) {
        let r = self.radius as isize;
        let i = ((dy + r) as usize) * self.side() + (dx + r) as usize;
        (self.real[i], self.imag[i])
    }
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|c| *c /= norm);
    }
}

/// Ordered filters, frequency-major and orientation-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<GaborFilter>,
}

impl FilterBank {
    pub fn filters(&self) -> &[GaborFilter] {
        &self.filters
    }
}

pub fn build_filter_bank(config: &GaborConfig) -> Result<FilterBank> {
    config.validate()?;
    let filters = config
        .frequencies
        .iter()
        .flat_map(|&f| {
            config.orientations.iter().map(move |&theta| {
                GaborFilter::new(
                    f,
                    theta,
                    config.sigma_for(f),
                    config.gamma_aspect,
                    config.radius_for(f),
                )
            })
        })
        .collect();
    Ok(FilterBank { filters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_order() {
        let cfg = GaborConfig::default();
        let bank = build_filter_bank(&cfg).unwrap();
        assert_eq!(bank.filters().len(), 9);
        let order: Vec<(f64, f64)> = bank
            .filters()
            .iter()
            .map(|f| (f.frequency, f.orientation))
            .collect();
        let mut expected = Vec::new();
        for f in &cfg.frequencies {
            for o in &cfg.orientations {
                expected.push((*f, *o));
            }
        }
        assert_eq!(order, expected);
        // ceil(3 * 0.56 / f)
        let radii: Vec<usize> = bank.filters().iter().map(|f| f.radius).collect();
        assert_eq!(radii, vec![17, 17, 17, 9, 9, 9, 5, 5, 5]);
    }

    #[test]
    fn real_kernel_is_zero_mean_and_unit_norm() {
        let bank = build_filter_bank(&GaborConfig::default()).unwrap();
        for f in bank.filters() {
            let sum: f64 = f.real.iter().sum();
            assert!(sum.abs() < 1e-9, "dc {sum}");
            let n_re: f64 = f.real.iter().map(|v| v * v).sum();
            let n_im: f64 = f.imag.iter().map(|v| v * v).sum();
            assert!((n_re - 1.0).abs() < 1e-12 && (n_im - 1.0).abs() < 1e-12);
            assert!(f.real.iter().chain(&f.imag).all(|v| v.is_finite()));
        }
    }

    #[test]
    fn horizontal_filter_symmetric_in_y() {
        let f = GaborFilter::new(0.2, 0.0, 2.8, 0.5, 9);
        let r = f.radius as isize;
        for dy in -r..=r {
            for dx in -r..=r {
                assert_eq!(f.at(dx, dy).0, f.at(dx, -dy).0);
            }
        }
    }

    #[test]
    fn real_even_imag_odd_about_center() {
        let f = GaborFilter::new(0.4, 1.0, 1.4, 0.5, 5);
        let r = f.radius as isize;
        for dy in -r..=r {
            for dx in -r..=r {
                let (re, im) = f.at(dx, dy);
                let (re2, im2) = f.at(-dx, -dy);
                assert!((re - re2).abs() < 1e-15);
                assert!((im + im2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let mut c = GaborConfig::default();
        c.frequencies.push(0.3);
        assert!(matches!(build_filter_bank(&c), Err(Error::InvalidConfig(_))));
        let mut c = GaborConfig::default();
        c.frequencies[0] = 0.6;
        assert!(c.validate().is_err());
        let mut c = GaborConfig::default();
        c.kernel_radius = Some(2);
        assert!(c.validate().is_err());
        let mut c = GaborConfig::default();
        c.sigma_envelope = Some(0.0);
        assert!(c.validate().is_err());
    }
}
