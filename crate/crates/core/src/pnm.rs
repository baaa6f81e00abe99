//! Binary PGM (`P5`) and PPM (`P6`) codecs, maxval 255 only.
//!
//! Decoding accepts `#` comments and arbitrary whitespace between header
//! fields. Encoding always writes the canonical form
//! `<magic>\n<width> <height>\n255\n<raster>`.

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage, MAX_DIMENSION};

/// A decoded PNM image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl PnmImage {
    /// Colour view of the image; gray rasters are channel-replicated.
    pub fn into_rgb(self) -> RgbImage {
        match self {
            PnmImage::Gray(g) => g.to_rgb(),
            PnmImage::Rgb(c) => c,
        }
    }
}

impl From<GrayImage> for PnmImage {
    fn from(img: GrayImage) -> Self {
        PnmImage::Gray(img)
    }
}

impl From<RgbImage> for PnmImage {
    fn from(img: RgbImage) -> Self {
        PnmImage::Rgb(img)
    }
}

fn err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Pnm { offset, reason: reason.into() }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(start) {
                None => Err(err(start, format!("unexpected end of header reading {field}"))),
                Some(b'-') => Err(err(start, format!("{field} must be positive"))),
                Some(&b) => Err(err(start, format!("malformed {field}: unexpected byte 0x{b:02x}"))),
            };
        }
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return Err(err(self.pos, format!("malformed {field}: unexpected byte 0x{b:02x}")));
            }
        }
        // Digit runs long enough to overflow are rejected as out of range below.
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        Ok(digits.parse::<usize>().unwrap_or(usize::MAX))
    }
}

/// Decodes a binary PGM or PPM file.
pub fn load_pnm(bytes: &[u8]) -> Result<PnmImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(m) => return Err(err(0, format!("unknown magic {:?}", String::from_utf8_lossy(m)))),
        None => return Err(err(0, "missing magic")),
    };
    let mut reader = HeaderReader { bytes, pos: 2 };
    if !reader.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(err(2, "magic must be followed by whitespace"));
    }

    let width_at = {
        reader.skip_whitespace_and_comments();
        reader.pos
    };
    let width = reader.number("width")?;
    let height_at = {
        reader.skip_whitespace_and_comments();
        reader.pos
    };
    let height = reader.number("height")?;
    let maxval_at = {
        reader.skip_whitespace_and_comments();
        reader.pos
    };
    let maxval = reader.number("maxval")?;

    for (value, at, field) in [(width, width_at, "width"), (height, height_at, "height")] {
        if value == 0 {
            return Err(err(at, format!("{field} must be positive")));
        }
        if value > MAX_DIMENSION {
            return Err(err(at, format!("{field} {value} exceeds the {MAX_DIMENSION} limit")));
        }
    }
    if maxval != 255 {
        return Err(err(maxval_at, format!("maxval must be 255, got {maxval}")));
    }

    // Exactly one whitespace byte separates maxval from the raster.
    let raster_at = reader.pos + 1;
    if !bytes.get(reader.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(err(reader.pos, "missing whitespace before raster"));
    }
    let needed = width * height * channels;
    let raster = &bytes[raster_at.min(bytes.len())..];
    if raster.len() < needed {
        return Err(err(
            raster_at + raster.len(),
            format!("truncated raster: expected {needed} bytes, found {}", raster.len()),
        ));
    }
    let raster = &raster[..needed];

    Ok(match channels {
        1 => PnmImage::Gray(GrayImage::new(width, height, raster.to_vec())?),
        _ => PnmImage::Rgb(RgbImage::from_interleaved(width, height, raster)?),
    })
}

/// Encodes in canonical form.
pub fn save_pnm(image: &PnmImage) -> Vec<u8> {
    match image {
        PnmImage::Gray(g) => encode(b"P5", g.width(), g.height(), g.as_raw()),
        PnmImage::Rgb(c) => encode(b"P6", c.width(), c.height(), &c.to_interleaved()),
    }
}

pub fn save_pgm(image: &GrayImage) -> Vec<u8> {
    encode(b"P5", image.width(), image.height(), image.as_raw())
}

pub fn save_ppm(image: &RgbImage) -> Vec<u8> {
    encode(b"P6", image.width(), image.height(), &image.to_interleaved())
}

fn encode(magic: &[u8], width: usize, height: usize, raster: &[u8]) -> Vec<u8> {
    let header = format!("\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(magic.len() + header.len() + raster.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(raster);
    out
}

pub fn read_pnm_file(path: &std::path::Path) -> Result<PnmImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_pnm(&bytes).map_err(|e| Error::BadFile { path: path.to_path_buf(), reason: e.to_string() })
}

pub fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
