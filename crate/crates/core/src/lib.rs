//! Vision-based inspection of gears.
//!
//! Two halves share one image pipeline:
//!
//! * a fixed filter bank (Gaussian blur, Sobel X/Y, Laplacian, sharpen)
//!   that produces edge images for a human operator, and
//! * a softmax "final layer" trained on pooled filter-bank features that
//!   labels each gear normal or broken and decides whether to discard it.

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod features;
pub mod filters;
pub mod image;
pub mod inspect;
pub mod model;
pub mod pnm;
pub mod rng;
pub mod synthgear;

pub use error::{Error, Result};
