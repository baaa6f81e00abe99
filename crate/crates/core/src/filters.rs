//! Convolution engine, Gaussian blur and the four-kernel edge bank.
//!
//! "Convolution" here is cross-correlation: the kernel is never flipped.
//! For the antisymmetric Sobel kernels that only changes the sign of the
//! response, and the display mapping takes the absolute value anyway.
//!
//! Responses accumulate in `f64`; quantisation to 8 bits happens only in
//! [`response_to_gray`] and at the end of [`gaussian_blur_gray`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};

/// Names of the bank kernels, in bank order.
pub const BANK: [&str; 4] = ["sobel_x", "sobel_y", "laplacian", "sharpen"];

/// Square, odd-sized correlation kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    name: String,
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(name: impl Into<String>, size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::InvalidKernel(format!("size {size} is not odd")));
        }
        if weights.len() != size * size {
            return Err(Error::InvalidKernel(format!("{} weights for a {size}x{size} kernel", weights.len())));
        }
        Ok(Self { name: name.into(), size, weights })
    }

    /// 3×3 kernel with a single 1 in the centre.
    pub fn identity() -> Self {
        Self::from_rows("identity", [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    }

    fn from_rows(name: &str, rows: [[f64; 3]; 3]) -> Self {
        Self { name: name.to_string(), size: 3, weights: rows.iter().flatten().copied().collect() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Looks up one of the bank kernels by name.
pub fn named_kernel(name: &str) -> Result<Kernel> {
    let rows = match name {
        "sobel_x" => [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]],
        "sobel_y" => [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]],
        "laplacian" => [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]],
        // identity minus laplacian
        "sharpen" => [[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]],
        other => return Err(Error::UnknownKernel(other.to_string())),
    };
    Ok(Kernel::from_rows(name, rows))
}

/// How samples outside the image are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Clamp coordinates to the nearest edge pixel.
    #[default]
    Replicate,
    /// Treat outside samples as 0.
    Zero,
}

/// Maps real responses back to displayable intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityMapping {
    /// Round, then clip to `[0, 255]`.
    Clamp,
    /// Absolute value, round, clip to `[0, 255]`.
    AbsClamp,
}

/// Real-valued filter output, same geometry as its input.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsePlane {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ResponsePlane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: values.len() });
        }
        Ok(Self { width, height, values })
    }

    pub fn from_gray(image: &GrayImage) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            values: image.as_raw().iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    fn sample(&self, x: isize, y: isize, border: BorderPolicy) -> f64 {
        let inside = x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height;
        if inside {
            return self.values[y as usize * self.width + x as usize];
        }
        match border {
            BorderPolicy::Zero => 0.0,
            BorderPolicy::Replicate => {
                let cx = x.clamp(0, self.width as isize - 1) as usize;
                let cy = y.clamp(0, self.height as isize - 1) as usize;
                self.values[cy * self.width + cx]
            }
        }
    }
}

/// Correlates `image` with `kernel`; out-of-range samples follow `border`.
pub fn convolve(image: &GrayImage, kernel: &Kernel, border: BorderPolicy) -> ResponsePlane {
    convolve_plane(&ResponsePlane::from_gray(image), kernel, border)
}

/// [`convolve`] over an arbitrary real plane.
pub fn convolve_plane(plane: &ResponsePlane, kernel: &Kernel, border: BorderPolicy) -> ResponsePlane {
    let n = kernel.size;
    let c = (n / 2) as isize;
    let mut values = Vec::with_capacity(plane.values.len());
    for y in 0..plane.height as isize {
        for x in 0..plane.width as isize {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let w = kernel.weights[i * n + j];
                    if w != 0.0 {
                        acc += w * plane.sample(x + j as isize - c, y + i as isize - c, border);
                    }
                }
            }
            values.push(acc);
        }
    }
    ResponsePlane { width: plane.width, height: plane.height, values }
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn response_to_gray(plane: &ResponsePlane, mapping: IntensityMapping) -> GrayImage {
    let data = plane
        .values
        .iter()
        .map(|&v| match mapping {
            IntensityMapping::Clamp => quantize(v),
            IntensityMapping::AbsClamp => quantize(v.abs()),
        })
        .collect();
    GrayImage::new(plane.width, plane.height, data).expect("plane geometry is valid")
}

/// Standard deviations (pixels) and optional odd tap counts of a separable blur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    sigma_x: f64,
    sigma_y: f64,
    size_x: Option<usize>,
    size_y: Option<usize>,
}

impl GaussianSpec {
    pub fn new(sigma_x: f64, sigma_y: f64) -> Result<Self> {
        Self::with_sizes(sigma_x, sigma_y, None, None)
    }

    pub fn isotropic(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn with_sizes(sigma_x: f64, sigma_y: f64, size_x: Option<usize>, size_y: Option<usize>) -> Result<Self> {
        for (axis, s) in [("x", sigma_x), ("y", sigma_y)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidGaussian(format!("sigma_{axis} must be positive and finite, got {s}")));
            }
        }
        for (axis, size) in [("x", size_x), ("y", size_y)] {
            if let Some(n) = size {
                if n % 2 == 0 {
                    return Err(Error::InvalidGaussian(format!("size_{axis} {n} is not odd")));
                }
            }
        }
        Ok(Self { sigma_x, sigma_y, size_x, size_y })
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn size_x(&self) -> Option<usize> {
        self.size_x
    }

    pub fn size_y(&self) -> Option<usize> {
        self.size_y
    }
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self { sigma_x: 1.0, sigma_y: 1.0, size_x: None, size_y: None }
    }
}

/// Tap count used when none is given: `2·ceil(3σ) + 1`.
pub fn default_taps(sigma: f64) -> usize {
    2 * (3.0 * sigma).ceil() as usize + 1
}

/// Sampled, normalised 1-D Gaussian with `size` taps.
pub fn gaussian_taps(sigma: f64, size: usize) -> Vec<f64> {
    let half = (size / 2) as isize;
    let raw: Vec<f64> = (-half..=half).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Horizontal and vertical 1-D kernels for `spec`.
pub fn make_gaussian_kernels(spec: &GaussianSpec) -> (Vec<f64>, Vec<f64>) {
    let nx = spec.size_x.unwrap_or_else(|| default_taps(spec.sigma_x));
    let ny = spec.size_y.unwrap_or_else(|| default_taps(spec.sigma_y));
    (gaussian_taps(spec.sigma_x, nx), gaussian_taps(spec.sigma_y, ny))
}

fn blur_plane(plane: &ResponsePlane, horizontal: &[f64], vertical: &[f64]) -> ResponsePlane {
    let (w, h) = (plane.width as isize, plane.height as isize);
    let hx = (horizontal.len() / 2) as isize;
    let hy = (vertical.len() / 2) as isize;
    let sample = |p: &ResponsePlane, x: isize, y: isize| p.sample(x, y, BorderPolicy::Replicate);

    let mut pass = Vec::with_capacity(plane.values.len());
    for y in 0..h {
        for x in 0..w {
            pass.push(horizontal.iter().enumerate().map(|(k, t)| t * sample(plane, x + k as isize - hx, y)).sum());
        }
    }
    let pass = ResponsePlane { width: plane.width, height: plane.height, values: pass };

    let mut out = Vec::with_capacity(pass.values.len());
    for y in 0..h {
        for x in 0..w {
            out.push(vertical.iter().enumerate().map(|(k, t)| t * sample(&pass, x, y + k as isize - hy)).sum());
        }
    }
    ResponsePlane { width: plane.width, height: plane.height, values: out }
}

/// Two-pass separable blur with replicated borders.
pub fn gaussian_blur_gray(image: &GrayImage, spec: &GaussianSpec) -> GrayImage {
    let (horizontal, vertical) = make_gaussian_kernels(spec);
    let blurred = blur_plane(&ResponsePlane::from_gray(image), &horizontal, &vertical);
    response_to_gray(&blurred, IntensityMapping::Clamp)
}

/// Per-channel [`gaussian_blur_gray`].
pub fn gaussian_blur_rgb(image: &RgbImage, spec: &GaussianSpec) -> RgbImage {
    let planes = image.channels().map(|p| gaussian_blur_gray(&p, spec));
    RgbImage::from_channels(&planes).expect("blur preserves geometry")
}

/// Blurs, then runs every bank kernel and maps the responses for display.
///
/// The edge kernels are shown as absolute magnitudes; sharpen is clamped.
pub fn apply_filter_bank(image: &GrayImage, blur: &GaussianSpec) -> BTreeMap<&'static str, GrayImage> {
    let blurred = gaussian_blur_gray(image, blur);
    BANK.iter()
        .map(|&name| {
            let kernel = named_kernel(name).expect("bank names are known");
            let mapping = if name == "sharpen" { IntensityMapping::Clamp } else { IntensityMapping::AbsClamp };
            (name, response_to_gray(&convolve(&blurred, &kernel, BorderPolicy::Replicate), mapping))
        })
        .collect()
}
