//! Plain-text model files.
//!
//! ```text
//! gearlens-model v1
//! classes<TAB>normal gear<TAB>broken gear
//! <canonical_size> <grid> <sigma_x> <sigma_y> <size_x|-> <size_y|->
//! <D weights> <bias>        one line per class
//! ```
//!
//! Reals are written as the shortest decimal that parses back to the same
//! `f64`, so a saved head predicts bit-identically after loading.

use std::fs;
use std::path::Path;

use crate::classifier::SoftmaxHead;
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::features::ExtractorConfig;
use crate::filters::GaussianSpec;

pub const MAGIC: &str = "gearlens-model";
pub const VERSION: &str = "v1";

fn optional_size(size: Option<usize>) -> String {
    size.map_or_else(|| "-".to_string(), |n| n.to_string())
}

pub fn model_text(head: &SoftmaxHead) -> String {
    let cfg = head.extractor();
    let blur = cfg.blur();
    let mut out = format!("{MAGIC} {VERSION}\nclasses");
    for name in head.class_names() {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    out.push_str(&format!(
        "{} {} {:?} {:?} {} {}\n",
        cfg.canonical_size(),
        cfg.grid(),
        blur.sigma_x(),
        blur.sigma_y(),
        optional_size(blur.size_x()),
        optional_size(blur.size_y()),
    ));
    for (row, bias) in head.weights().iter().zip(head.bias()) {
        let line: Vec<String> = row.iter().chain(std::iter::once(bias)).map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_model(head: &SoftmaxHead, path: &Path) -> Result<()> {
    fs::write(path, model_text(head)).map_err(|e| Error::io(path, e))
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Model { line, reason: format!("unparsable number `{token}`") })
}

fn parse_extractor(text: &str, line: usize) -> Result<ExtractorConfig> {
    let bad = |reason: String| Error::Model { line, reason };
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [size, grid, sx, sy, nx, ny] = fields[..] else {
        return Err(bad(format!("expected 6 extractor fields, found {}", fields.len())));
    };
    let int = |t: &str| t.parse::<usize>().map_err(|_| bad(format!("unparsable integer `{t}`")));
    let opt = |t: &str| if t == "-" { Ok(None) } else { int(t).map(Some) };
    let blur = GaussianSpec::with_sizes(parse_real(sx, line)?, parse_real(sy, line)?, opt(nx)?, opt(ny)?)
        .map_err(|e| bad(e.to_string()))?;
    ExtractorConfig::new(int(size)?, blur, int(grid)?).map_err(|e| bad(e.to_string()))
}

pub fn parse_model(text: &str) -> Result<SoftmaxHead> {
    let lines: Vec<&str> = text.lines().collect();
    let line = |i: usize| -> Result<&str> {
        lines.get(i).copied().ok_or_else(|| Error::Model { line: i + 1, reason: "unexpected end of file".into() })
    };

    let header = line(0)?;
    match header.split_once(' ') {
        Some((MAGIC, VERSION)) => {}
        Some((MAGIC, other)) => {
            return Err(Error::Model { line: 1, reason: format!("unsupported version `{other}`, expected {VERSION}") })
        }
        _ => return Err(Error::Model { line: 1, reason: format!("bad magic, expected `{MAGIC} {VERSION}`") }),
    }

    let expected_classes = format!("classes\t{}", Label::ALL.map(Label::as_str).join("\t"));
    if line(1)? != expected_classes {
        return Err(Error::Model { line: 2, reason: format!("expected `{expected_classes}`") });
    }

    let extractor = parse_extractor(line(2)?, 3)?;
    let d = extractor.dimension();
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    for (k, _) in Label::ALL.iter().enumerate() {
        let line_no = 4 + k;
        let values: Vec<f64> =
            line(3 + k)?.split_whitespace().map(|t| parse_real(t, line_no)).collect::<Result<_>>()?;
        if values.len() != d + 1 {
            return Err(Error::Model {
                line: line_no,
                reason: format!("dimension mismatch: expected {} values ({d} weights and a bias), got {}", d + 1, values.len()),
            });
        }
        bias.push(values[d]);
        weights.push(values[..d].to_vec());
    }
    if let Some(extra) = lines.iter().skip(3 + Label::ALL.len()).position(|l| !l.trim().is_empty()) {
        return Err(Error::Model { line: 4 + Label::ALL.len() + extra, reason: "unexpected trailing content".into() });
    }
    SoftmaxHead::from_parts(weights, bias, extractor)
}

pub fn load_model(path: &Path) -> Result<SoftmaxHead> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
