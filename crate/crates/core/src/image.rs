//! 8-bit raster images and colour conversion.
//!
//! Both image types store pixels row-major and are immutable once built:
//! the constructors check the dimension invariants and nothing hands out
//! mutable access afterwards.

use crate::error::{Error, Result};

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 1 << 16;

fn check_dimensions(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!("dimensions {width}x{height} must be at least 1x1")));
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::InvalidImage(format!(
            "dimensions {width}x{height} exceed the {MAX_DIMENSION} pixel limit"
        )));
    }
    Ok(())
}

/// Single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dimensions(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} intensities for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        check_dimensions(width, height)?;
        Ok(Self { width, height, data: vec![value; width * height] })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        check_dimensions(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Promotes to colour by copying the intensity into all three channels.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| [v, v, v]).collect(),
        }
    }
}

/// Three-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_dimensions(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image from interleaved `r, g, b` bytes.
    pub fn from_interleaved(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(3) {
            return Err(Error::InvalidImage(format!("{} bytes is not a whole number of RGB pixels", bytes.len())));
        }
        let data = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        check_dimensions(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        self.data.iter().flatten().copied().collect()
    }

    /// Splits into one gray plane per channel.
    pub fn channels(&self) -> [GrayImage; 3] {
        std::array::from_fn(|c| GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| p[c]).collect(),
        })
    }

    /// Inverse of [`RgbImage::channels`]. All planes must share dimensions.
    pub fn from_channels(planes: &[GrayImage; 3]) -> Result<Self> {
        let (w, h) = (planes[0].width, planes[0].height);
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(Error::InvalidImage("channel planes differ in size".into()));
        }
        let data = (0..w * h).map(|i| [planes[0].data[i], planes[1].data[i], planes[2].data[i]]).collect();
        Self::new(w, h, data)
    }
}

/// Rec. 601 luma, rounded half up.
///
/// Evaluated in integer thousandths so that ties round exactly.
pub fn rgb_to_gray(image: &RgbImage) -> GrayImage {
    let data = image
        .data
        .iter()
        .map(|&[r, g, b]| {
            let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
            ((weighted + 500) / 1000) as u8
        })
        .collect();
    GrayImage { width: image.width, height: image.height, data }
}

/// Bilinear resample with pixel-centre alignment and edge clamping.
pub fn resize_bilinear(image: &RgbImage, width: usize, height: usize) -> Result<RgbImage> {
    check_dimensions(width, height)?;
    if width == image.width && height == image.height {
        return Ok(image.clone());
    }
    let sx = image.width as f64 / width as f64;
    let sy = image.height as f64 / height as f64;
    let max_x = (image.width - 1) as f64;
    let max_y = (image.height - 1) as f64;

    RgbImage::from_fn(width, height, |x, y| {
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(image.width - 1), (y0 + 1).min(image.height - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let (p00, p10, p01, p11) = (image.get(x0, y0), image.get(x1, y0), image.get(x0, y1), image.get(x1, y1));
        std::array::from_fn(|c| {
            let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
            let bottom = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
            (top * (1.0 - ty) + bottom * ty).round().clamp(0.0, 255.0) as u8
        })
    })
}
