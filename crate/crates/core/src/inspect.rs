//! End-to-end inspection of one part: operator images, prediction,
//! keep/discard decision and the textual report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::classifier::{classify, predict, Probabilities, SoftmaxHead};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::filters::{apply_filter_bank, GaussianSpec, BANK};
use crate::image::{rgb_to_gray, RgbImage};
use crate::pnm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Keep,
    Discard,
}

impl Decision {
    /// Broken parts leave the line.
    pub fn for_label(label: Label) -> Self {
        match label {
            Label::NormalGear => Decision::Keep,
            Label::BrokenGear => Decision::Discard,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Keep => "keep",
            Decision::Discard => "discard",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InspectionReport {
    pub probabilities: Probabilities,
    pub predicted: Label,
    pub decision: Decision,
    /// One filtered image per bank kernel, in bank order.
    pub filtered_paths: Vec<PathBuf>,
}

impl InspectionReport {
    pub fn text(&self) -> String {
        format_report(&self.probabilities)
    }
}

/// `<stem>_<kernel>.pgm`
pub fn filtered_file_name(stem: &str, kernel: &str) -> String {
    format!("{stem}_{kernel}.pgm")
}

/// Writes the four filter-bank images for `image` into `output_dir`.
pub fn write_filter_bank(image: &RgbImage, blur: &GaussianSpec, stem: &str, output_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let bank = apply_filter_bank(&rgb_to_gray(image), blur);
    BANK.iter()
        .map(|&name| {
            let path = output_dir.join(filtered_file_name(stem, name));
            pnm::write_file(&path, &pnm::save_pgm(&bank[name]))?;
            Ok(path)
        })
        .collect()
}

pub fn inspect(image: &RgbImage, head: &SoftmaxHead, blur: &GaussianSpec, stem: &str, output_dir: &Path) -> Result<InspectionReport> {
    let filtered_paths = write_filter_bank(image, blur, stem, output_dir)?;
    let probabilities = predict(head, image);
    let predicted = classify(&probabilities);
    Ok(InspectionReport { decision: Decision::for_label(predicted), predicted, probabilities, filtered_paths })
}

/// The four-line result block.
///
/// Probabilities are listed highest first (normal first on a tie), each as
/// the shortest decimal that round-trips through `f32`.
pub fn format_report(probs: &Probabilities) -> String {
    let mut order = Label::ALL;
    if probs.broken() > probs.normal() {
        order.reverse();
    }
    let mut out = String::from("[INFO]The results of the retrained model are as follows:\n");
    for label in order {
        out.push_str(&format!(
            "[INFO]Probability that the given image is a {label} is: {}\n",
            probs.of(label) as f32
        ));
    }
    out.push_str(&format!("[INFO]The given component is a: {}\n", classify(probs)));
    out
}
