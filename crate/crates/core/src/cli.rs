//! Command-line front end.
//!
//! Progress goes to stderr; reports and metrics go to stdout. Exit status
//! is 0 on success, 1 on domain errors and 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::classifier::{evaluate, train, TrainConfig, TrainingTrace};
use crate::dataset::{ingest_directory, read_manifest, split_dataset, write_manifest, Part, SplitRatios};
use crate::error::{Error, Result};
use crate::features::ExtractorConfig;
use crate::filters::{apply_filter_bank, gaussian_blur_gray, gaussian_blur_rgb, GaussianSpec, BANK};
use crate::image::rgb_to_gray;
use crate::inspect::{filtered_file_name, format_report, inspect};
use crate::model::{load_model, save_model};
use crate::pnm::{self, PnmImage};
use crate::synthgear::generate_dataset;

#[derive(Debug, Parser)]
#[command(name = "gearlens", version, about = "Gear fracture inspection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic dataset of intact and defective gears.
    Synth {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 128)]
        size: usize,
    },
    /// Split a dataset and write the manifest.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "0.6,0.2,0.2", value_parser = parse_ratios)]
        ratios: SplitRatios,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Retrain the softmax head and save it.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        eval_interval: Option<usize>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Score a saved model on a dataset or one part of a manifest.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, requires = "part")]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest", value_enum)]
        part: Option<PartArg>,
    },
    /// Write filter-bank images for one input.
    Filter {
        #[arg(long)]
        kernel: KernelArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Gaussian-blur one image.
    Blur {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sigma_x: f64,
        #[arg(long)]
        sigma_y: f64,
    },
    /// Inspect one part: filter images, prediction and report.
    Inspect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PartArg {
    Train,
    Validation,
    Test,
}

impl From<PartArg> for Part {
    fn from(p: PartArg) -> Self {
        match p {
            PartArg::Train => Part::Train,
            PartArg::Validation => Part::Validation,
            PartArg::Test => Part::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KernelArg {
    SobelX,
    SobelY,
    Laplacian,
    Sharpen,
    All,
}

impl KernelArg {
    fn names(self) -> Vec<&'static str> {
        match self {
            KernelArg::SobelX => vec!["sobel_x"],
            KernelArg::SobelY => vec!["sobel_y"],
            KernelArg::Laplacian => vec!["laplacian"],
            KernelArg::Sharpen => vec!["sharpen"],
            KernelArg::All => BANK.to_vec(),
        }
    }
}

fn parse_ratios(s: &str) -> std::result::Result<SplitRatios, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdio>", e)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth { count, seed, out: dest, size } => {
            let summary = generate_dataset(count, seed, size, &dest)?;
            writeln!(err, "wrote {} images under {}", summary.total(), dest.display()).map_err(io_err)?;
            writeln!(out, "normal={} broken={}", summary.normal.len(), summary.broken.len()).map_err(io_err)?;
        }
        Command::Split { data, seed, ratios, manifest } => {
            let items = ingest_directory(&data)?;
            let split = split_dataset(&items, ratios, seed)?;
            write_manifest(&split, &manifest)?;
            writeln!(err, "manifest written to {}", manifest.display()).map_err(io_err)?;
            writeln!(out, "train={} validation={} test={}", split.train.len(), split.validation.len(), split.test.len())
                .map_err(io_err)?;
        }
        Command::Train { data, seed, lr, steps, eval_interval, model, csv } => {
            let items = ingest_directory(&data)?;
            writeln!(err, "loaded {} images from {}", items.len(), data.display()).map_err(io_err)?;
            let mut cfg = TrainConfig::new(steps, lr, seed);
            if let Some(n) = eval_interval {
                cfg.eval_interval = n;
            }
            let outcome = train(&items, &cfg, ExtractorConfig::default())?;
            print_trace(&outcome.trace, out)?;
            if let Some(path) = csv {
                write_trace_csv(&outcome.trace, &path)?;
            }
            save_model(&outcome.head, &model)?;
            let last_train = outcome.trace.train.last().expect("at least one step");
            let last_val = outcome.trace.validation.last().expect("final step is evaluated");
            writeln!(out, "final train_acc={} train_ce={}", last_train.accuracy, last_train.cross_entropy).map_err(io_err)?;
            writeln!(out, "final val_acc={} val_ce={}", last_val.accuracy, last_val.cross_entropy).map_err(io_err)?;
            writeln!(out, "final test_acc={} test_ce={}", outcome.test_accuracy, outcome.test_cross_entropy)
                .map_err(io_err)?;
            writeln!(err, "model written to {}", model.display()).map_err(io_err)?;
        }
        Command::Evaluate { model, data, manifest, part } => {
            let head = load_model(&model)?;
            let items = match (manifest, part) {
                (Some(path), Some(part)) => read_manifest(&path, &data)?.part(part.into()).to_vec(),
                _ => ingest_directory(&data)?,
            };
            let (accuracy, ce) = evaluate(&head, &items)?;
            writeln!(out, "items={} accuracy={accuracy} cross_entropy={ce}", items.len()).map_err(io_err)?;
        }
        Command::Filter { kernel, input, out: dir, sigma } => {
            let spec = GaussianSpec::isotropic(sigma)?;
            let image = pnm::read_pnm_file(&input)?.into_rgb();
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let bank = apply_filter_bank(&rgb_to_gray(&image), &spec);
            for name in kernel.names() {
                let path = dir.join(filtered_file_name(&stem(&input), name));
                pnm::write_file(&path, &pnm::save_pgm(&bank[name]))?;
                writeln!(out, "{}", path.display()).map_err(io_err)?;
            }
        }
        Command::Blur { input, out: path, sigma_x, sigma_y } => {
            let spec = GaussianSpec::new(sigma_x, sigma_y)?;
            let blurred = match pnm::read_pnm_file(&input)? {
                PnmImage::Gray(g) => PnmImage::Gray(gaussian_blur_gray(&g, &spec)),
                PnmImage::Rgb(c) => PnmImage::Rgb(gaussian_blur_rgb(&c, &spec)),
            };
            pnm::write_file(&path, &pnm::save_pnm(&blurred))?;
            writeln!(out, "{}", path.display()).map_err(io_err)?;
        }
        Command::Inspect { model, input, out: dir } => {
            let head = load_model(&model)?;
            let image = pnm::read_pnm_file(&input)?.into_rgb();
            let blur = *head.extractor().blur();
            let report = inspect(&image, &head, &blur, &stem(&input), &dir)?;
            for path in &report.filtered_paths {
                writeln!(err, "wrote {}", path.display()).map_err(io_err)?;
            }
            writeln!(out, "decision={}", report.decision).map_err(io_err)?;
            write!(out, "{}", format_report(&report.probabilities)).map_err(io_err)?;
        }
    }
    Ok(())
}

fn print_trace(trace: &TrainingTrace, out: &mut dyn Write) -> Result<()> {
    for val in &trace.validation {
        let train = &trace.train[val.step - 1];
        writeln!(
            out,
            "step={} train_acc={} train_ce={} val_acc={} val_ce={}",
            val.step, train.accuracy, train.cross_entropy, val.accuracy, val.cross_entropy
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// One row per step; validation columns are empty between evaluations.
fn write_trace_csv(trace: &TrainingTrace, path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| Error::BadFile { path: path.to_path_buf(), reason: e.to_string() };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    writer.write_record(["step", "train_acc", "train_ce", "val_acc", "val_ce"]).map_err(csv_err)?;
    let mut validation = trace.validation.iter().peekable();
    for record in &trace.train {
        let (val_acc, val_ce) = match validation.next_if(|v| v.step == record.step) {
            Some(v) => (v.accuracy.to_string(), v.cross_entropy.to_string()),
            None => (String::new(), String::new()),
        };
        writer
            .write_record([
                record.step.to_string(),
                record.accuracy.to_string(),
                record.cross_entropy.to_string(),
                val_acc,
                val_ce,
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
