//! Labelled-image ingestion, seeded train/validation/test splitting and
//! the split manifest.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::pnm;
use crate::rng::SplitMix64;
use crate::synthgear::{BROKEN_DIR, NORMAL_DIR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NormalGear,
    BrokenGear,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::NormalGear, Label::BrokenGear];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NormalGear => "normal gear",
            Label::BrokenGear => "broken gear",
        }
    }

    /// Position in the classifier's class order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Self::ALL.get(index).copied()
    }

    fn from_dir(dir: &str) -> Option<Label> {
        match dir {
            NORMAL_DIR => Some(Label::NormalGear),
            BROKEN_DIR => Some(Label::BrokenGear),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    /// `<class dir>/<file name>`, unique within a dataset.
    pub id: String,
    pub label: Label,
    pub image: RgbImage,
}

fn is_pnm(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("ppm" | "pgm" | "pnm")
    )
}

/// Loads every PNM file under `root/normal_gear` and `root/broken_gear`.
///
/// Gray files are promoted to colour. Items come back sorted by id.
pub fn ingest_directory(root: &Path) -> Result<Vec<LabeledImage>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut seen = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if Label::from_dir(&name).is_none() {
            return Err(Error::Dataset(format!("unknown subdirectory `{name}` in {}", root.display())));
        }
        seen.push(name);
    }

    let mut items = Vec::new();
    for dir in [NORMAL_DIR, BROKEN_DIR] {
        if !seen.iter().any(|s| s == dir) {
            return Err(Error::Dataset(format!("missing class directory `{dir}` in {}", root.display())));
        }
        let label = Label::from_dir(dir).expect("class dirs map to labels");
        let class_dir = root.join(dir);
        let mut found = 0;
        for entry in fs::read_dir(&class_dir).map_err(|e| Error::io(&class_dir, e))? {
            let path = entry.map_err(|e| Error::io(&class_dir, e))?.path();
            if !path.is_file() || !is_pnm(&path) {
                continue;
            }
            let image = pnm::read_pnm_file(&path)?.into_rgb();
            let file = path.file_name().expect("file has a name").to_string_lossy();
            items.push(LabeledImage { id: format!("{dir}/{file}"), label, image });
            found += 1;
        }
        if found == 0 {
            return Err(Error::Dataset(format!("class directory `{dir}` contains no PNM files")));
        }
    }
    items.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(items)
}

/// Train / validation / test proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    train: f64,
    validation: f64,
    test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        if [train, validation, test].iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("ratios must be non-negative: {train},{validation},{test}")));
        }
        if (train + validation + test - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("ratios must sum to 1: {train},{validation},{test}")));
        }
        Ok(Self { train, validation, test })
    }

    pub fn train(&self) -> f64 {
        self.train
    }

    pub fn validation(&self) -> f64 {
        self.validation
    }

    pub fn test(&self) -> f64 {
        self.test
    }

    /// Part sizes for `n` items by largest remainder: every part gets the
    /// floor of its exact share, and the leftover items go one each to the
    /// parts with the largest fractional remainders (ties in train,
    /// validation, test order). Each size is within one item of `ratio · n`.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let exact = [self.train, self.validation, self.test].map(|r| r * n as f64);
        // the epsilon absorbs products such as 0.29 * 100 = 28.999999999999996
        let mut sizes = exact.map(|x| (x + 1e-9).floor() as usize);
        let remainders = std::array::from_fn::<f64, 3, _>(|i| (exact[i] - sizes[i] as f64).max(0.0));
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
        let leftover = n.saturating_sub(sizes.iter().sum());
        for &i in order.iter().take(leftover) {
            sizes[i] += 1;
        }
        (sizes[0], sizes[1], sizes[2])
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.6, validation: 0.2, test: 0.2 }
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("ratios `{s}` are not three numbers")))?;
        match parts[..] {
            [a, b, c] => Self::new(a, b, c),
            _ => Err(Error::InvalidArgument(format!("ratios `{s}` must have exactly three parts"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Train,
    Validation,
    Test,
}

impl Part {
    pub fn as_str(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Validation => "validation",
            Part::Test => "test",
        }
    }
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Part::Train),
            "validation" => Ok(Part::Validation),
            "test" => Ok(Part::Test),
            _ => Err(Error::InvalidArgument(format!("unknown split part `{s}`"))),
        }
    }
}

/// Disjoint train / validation / test partition. Each part is id-sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub train: Vec<LabeledImage>,
    pub validation: Vec<LabeledImage>,
    pub test: Vec<LabeledImage>,
}

impl DatasetSplit {
    pub fn part(&self, part: Part) -> &[LabeledImage] {
        match part {
            Part::Train => &self.train,
            Part::Validation => &self.validation,
            Part::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ids(part: &[LabeledImage]) -> impl Iterator<Item = &str> {
        part.iter().map(|i| i.id.as_str())
    }
}

/// Sorts by id, shuffles with SplitMix64(`seed`), then cuts train, validation, test.
pub fn split_dataset(items: &[LabeledImage], ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    let n = items.len();
    if n < 3 {
        return Err(Error::Dataset(format!("need at least 3 items to split, got {n}")));
    }
    let mut unique = HashSet::with_capacity(n);
    if let Some(dup) = items.iter().find(|i| !unique.insert(i.id.as_str())) {
        return Err(Error::Dataset(format!("duplicate id `{}`", dup.id)));
    }

    let (n_train, n_val, n_test) = ratios.sizes(n);
    for (name, size, ratio) in
        [("train", n_train, ratios.train), ("validation", n_val, ratios.validation), ("test", n_test, ratios.test)]
    {
        if size == 0 && ratio > 0.0 {
            return Err(Error::Dataset(format!("ratio {ratio} leaves the {name} part empty for {n} items")));
        }
    }

    let mut order: Vec<&LabeledImage> = items.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    SplitMix64::new(seed).shuffle(&mut order);

    let take = |range: std::ops::Range<usize>| {
        let mut part: Vec<LabeledImage> = order[range].iter().map(|&i| i.clone()).collect();
        part.sort_by(|a, b| a.id.cmp(&b.id));
        part
    };
    let split = DatasetSplit {
        train: take(0..n_train),
        validation: take(n_train..n_train + n_val),
        test: take(n_train + n_val..n),
    };
    debug_assert_eq!(split.len(), n);
    Ok(split)
}

/// One `<part>\t<label>\t<id>` line per item, blocks in train/validation/test order.
pub fn manifest_text(split: &DatasetSplit) -> String {
    let mut out = String::new();
    for part in [Part::Train, Part::Validation, Part::Test] {
        for item in split.part(part) {
            out.push_str(&format!("{}\t{}\t{}\n", part.as_str(), item.label, item.id));
        }
    }
    out
}

pub fn write_manifest(split: &DatasetSplit, path: &Path) -> Result<()> {
    fs::write(path, manifest_text(split)).map_err(|e| Error::io(path, e))
}

/// Parses manifest text and loads each referenced image from `root`.
pub fn parse_manifest(text: &str, root: &Path) -> Result<DatasetSplit> {
    let mut split = DatasetSplit::default();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let bad = |reason: String| Error::Manifest { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        let [part, label, id] = fields[..] else {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let part: Part = part.parse().map_err(|e: Error| bad(e.to_string()))?;
        let label: Label = label.parse().map_err(|e: Error| bad(e.to_string()))?;
        if id.is_empty() || !ids.insert(id.to_string()) {
            return Err(bad(format!("empty or duplicate id `{id}`")));
        }
        let path = root.join(id);
        if !path.is_file() {
            return Err(bad(format!("missing file {}", path.display())));
        }
        let image = pnm::read_pnm_file(&path)?.into_rgb();
        let item = LabeledImage { id: id.to_string(), label, image };
        match part {
            Part::Train => split.train.push(item),
            Part::Validation => split.validation.push(item),
            Part::Test => split.test.push(item),
        }
    }
    for part in [&mut split.train, &mut split.validation, &mut split.test] {
        part.sort_by(|a, b| a.id.cmp(&b.id));
    }
    Ok(split)
}

pub fn read_manifest(path: &Path, root: &Path) -> Result<DatasetSplit> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, root)
}

/// Checks that the parts are pairwise disjoint and together equal `items`.
pub fn is_partition(split: &DatasetSplit, items: &[LabeledImage]) -> bool {
    let mut all: Vec<&str> = DatasetSplit::ids(&split.train)
        .chain(DatasetSplit::ids(&split.validation))
        .chain(DatasetSplit::ids(&split.test))
        .collect();
    let mut expected: Vec<&str> = items.iter().map(|i| i.id.as_str()).collect();
    all.sort_unstable();
    expected.sort_unstable();
    all == expected
}
