//! Fixed filter-bank feature extractor.
//!
//! This is the frozen front end whose output the softmax head is trained
//! on. Nothing here is learned: the image is resized, converted to gray,
//! blurred and run through the four bank kernels, and the absolute
//! responses are mean-pooled over a square grid.

use crate::error::{Error, Result};
use crate::filters::{convolve, gaussian_blur_gray, named_kernel, BorderPolicy, GaussianSpec, BANK};
use crate::image::{resize_bilinear, rgb_to_gray, GrayImage, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractorConfig {
    canonical_size: usize,
    blur: GaussianSpec,
    grid: usize,
}

impl ExtractorConfig {
    pub fn new(canonical_size: usize, blur: GaussianSpec, grid: usize) -> Result<Self> {
        if grid == 0 || canonical_size < grid {
            return Err(Error::InvalidArgument(format!(
                "need canonical_size >= grid >= 1, got size {canonical_size} and grid {grid}"
            )));
        }
        Ok(Self { canonical_size, blur, grid })
    }

    pub fn canonical_size(&self) -> usize {
        self.canonical_size
    }

    pub fn blur(&self) -> &GaussianSpec {
        &self.blur
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Feature length: four pooled kernels plus global mean and deviation.
    pub fn dimension(&self) -> usize {
        BANK.len() * self.grid * self.grid + 2
    }
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self { canonical_size: 128, blur: GaussianSpec::default(), grid: 4 }
    }
}

/// Components all lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Mean of `values` over each grid cell, raster order.
fn pool(values: &[f64], size: usize, grid: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid * grid);
    for cy in 0..grid {
        let (y0, y1) = (cy * size / grid, (cy + 1) * size / grid);
        for cx in 0..grid {
            let (x0, x1) = (cx * size / grid, (cx + 1) * size / grid);
            let mut sum = 0.0;
            for y in y0..y1 {
                sum += values[y * size + x0..y * size + x1].iter().sum::<f64>();
            }
            out.push(sum / ((y1 - y0) * (x1 - x0)) as f64);
        }
    }
    out
}

/// The blurred, canonical-size gray image every feature is computed from.
pub fn preprocess(image: &RgbImage, config: &ExtractorConfig) -> GrayImage {
    let n = config.canonical_size;
    let resized = resize_bilinear(image, n, n).expect("canonical size is valid");
    gaussian_blur_gray(&rgb_to_gray(&resized), &config.blur)
}

pub fn extract_features(image: &RgbImage, config: &ExtractorConfig) -> FeatureVector {
    let n = config.canonical_size;
    let blurred = preprocess(image, config);
    let intensities: Vec<f64> = blurred.as_raw().iter().map(|&v| v as f64).collect();

    let mut values = Vec::with_capacity(config.dimension());
    for name in BANK {
        let response = convolve(&blurred, &named_kernel(name).expect("bank kernel"), BorderPolicy::Replicate);
        let magnitude: Vec<f64> = if name == "sharpen" {
            // high-frequency residue, so constants map to zero like the other kernels
            response.values().iter().zip(&intensities).map(|(r, v)| (r - v).abs()).collect()
        } else {
            response.values().iter().map(|r| r.abs()).collect()
        };
        values.extend(pool(&magnitude, n, config.grid).into_iter().map(|m| m / 255.0));
    }

    let count = intensities.len() as f64;
    let mean = intensities.iter().sum::<f64>() / count;
    let variance = intensities.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    values.push(mean / 255.0);
    values.push(variance.sqrt() / 255.0);

    FeatureVector(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}
