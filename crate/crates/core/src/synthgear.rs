//! Parametric gear silhouettes with optional defects.
//!
//! A gear is a filled disc of radius `root_radius` with `teeth` square teeth
//! of height `tooth_height` around it. Tooth `k` spans the first half of the
//! angular period `[k, k + 1) · 2π / teeth`, measured from the +x axis with
//! y pointing down. Edges are hard (no anti-aliasing).

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::pnm;
use crate::rng::SplitMix64;

/// Class directory for defect-free gears.
pub const NORMAL_DIR: &str = "normal_gear";
/// Class directory for defective gears.
pub const BROKEN_DIR: &str = "broken_gear";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Defect {
    None,
    /// Tooth `index` is cut down to the root circle.
    MissingTooth(usize),
    /// A background band along the ray at `angle` radians, `width` pixels
    /// across, running from half the root radius out to the rim.
    Crack { angle: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GearSpec {
    pub image_size: usize,
    pub root_radius: f64,
    pub tooth_height: f64,
    pub teeth: usize,
    pub foreground: u8,
    pub background: u8,
    pub defect: Defect,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GearSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGear(msg));
        if self.image_size < 32 {
            return bad(format!("image_size {} is below 32", self.image_size));
        }
        if !(self.root_radius > 0.0 && self.tooth_height >= 0.0) {
            return bad("radii must be positive".into());
        }
        if self.root_radius + self.tooth_height >= self.image_size as f64 / 2.0 {
            return bad(format!(
                "outer radius {} does not fit in a {} pixel image",
                self.root_radius + self.tooth_height,
                self.image_size
            ));
        }
        if self.teeth < 6 {
            return bad(format!("{} teeth, need at least 6", self.teeth));
        }
        if self.foreground == self.background {
            return bad("foreground and background must differ".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma {} must be finite and non-negative", self.noise_sigma));
        }
        match self.defect {
            Defect::MissingTooth(k) if k >= self.teeth => bad(format!("missing tooth {k} out of range 0..{}", self.teeth)),
            Defect::Crack { width, angle } if !(width > 0.0 && angle.is_finite()) => {
                bad("crack width must be positive and angle finite".into())
            }
            _ => Ok(()),
        }
    }

    fn outer_radius(&self) -> f64 {
        self.root_radius + self.tooth_height
    }

    /// Whether the pixel whose centre is at offset `(dx, dy)` from the image
    /// centre belongs to the gear.
    fn is_foreground(&self, dx: f64, dy: f64) -> bool {
        let r = dx.hypot(dy);
        let theta = dy.atan2(dx).rem_euclid(TAU);
        let period = theta / TAU * self.teeth as f64;
        let tooth = (period.floor() as usize).min(self.teeth - 1);
        let on_tooth = period.fract() < 0.5;

        let limit = match self.defect {
            Defect::MissingTooth(k) if k == tooth => self.root_radius,
            _ if on_tooth => self.outer_radius(),
            _ => self.root_radius,
        };
        if r > limit {
            return false;
        }
        if let Defect::Crack { angle, width } = self.defect {
            let (s, c) = angle.sin_cos();
            let along = dx * c + dy * s;
            let across = (dy * c - dx * s).abs();
            if along >= 0.0 && across <= width / 2.0 && r >= self.root_radius / 2.0 {
                return false;
            }
        }
        true
    }
}

/// Renders `spec` as a gray-valued colour image (R = G = B before noise).
///
/// Noise is one Box–Muller sample per pixel in raster order, shared by all
/// three channels.
pub fn render_gear(spec: &GearSpec) -> Result<RgbImage> {
    spec.validate()?;
    let n = spec.image_size;
    let centre = n as f64 / 2.0;
    let mut rng = SplitMix64::new(spec.seed);
    RgbImage::from_fn(n, n, |x, y| {
        let fg = spec.is_foreground(x as f64 + 0.5 - centre, y as f64 + 0.5 - centre);
        let base = if fg { spec.foreground } else { spec.background };
        let v = if spec.noise_sigma > 0.0 {
            (base as f64 + spec.noise_sigma * rng.next_gaussian()).round().clamp(0.0, 255.0) as u8
        } else {
            base
        };
        [v, v, v]
    })
}

/// Nominal geometry at 128 px: six tall teeth reaching close to the frame.
const NOMINAL_ROOT: f64 = 30.0;
const NOMINAL_TOOTH: f64 = 30.0;
const NOMINAL_TEETH: usize = 6;

/// The intact gear used as a shared test fixture.
pub fn fixture_intact() -> GearSpec {
    GearSpec {
        image_size: 128,
        root_radius: NOMINAL_ROOT,
        tooth_height: NOMINAL_TOOTH,
        teeth: NOMINAL_TEETH,
        foreground: 240,
        background: 10,
        defect: Defect::None,
        noise_sigma: 0.0,
        seed: 7,
    }
}

/// [`fixture_intact`] with the first tooth missing.
pub fn fixture_missing_tooth() -> GearSpec {
    GearSpec { defect: Defect::MissingTooth(0), ..fixture_intact() }
}

/// Draws the randomised geometry of one dataset item from `seed`.
///
/// Every item shares the nominal tooth layout with small jitter in radii,
/// intensities and noise. Defective items alternate between a missing
/// tooth (even `defect_index`) and a crack (odd).
pub fn sample_spec(image_size: usize, seed: u64, defect_index: Option<usize>) -> GearSpec {
    let mut rng = SplitMix64::new(seed);
    let scale = image_size as f64 / 128.0;
    let root_radius = (NOMINAL_ROOT + rng.uniform(-0.5, 0.5)) * scale;
    let tooth_height = (NOMINAL_TOOTH + rng.uniform(-0.5, 0.5)) * scale;
    let teeth = NOMINAL_TEETH;
    let foreground = rng.uniform(230.0, 251.0) as u8;
    let background = rng.uniform(5.0, 21.0) as u8;
    let noise_sigma = rng.uniform(1.0, 3.0);
    let defect = match defect_index {
        None => Defect::None,
        Some(i) if i % 2 == 0 => Defect::MissingTooth(rng.below(teeth as u64) as usize),
        Some(_) => Defect::Crack { angle: rng.uniform(0.0, TAU), width: rng.uniform(18.0, 22.0) * scale },
    };
    GearSpec {
        image_size,
        root_radius,
        tooth_height,
        teeth,
        foreground,
        background,
        defect,
        noise_sigma,
        seed: rng.next_u64(),
    }
}

/// Files written by [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub normal: Vec<PathBuf>,
    pub broken: Vec<PathBuf>,
}

impl DatasetSummary {
    pub fn total(&self) -> usize {
        self.normal.len() + self.broken.len()
    }
}

/// Writes `count_per_class` intact and `count_per_class` defective gears.
///
/// Normal item `i` is seeded with `base_seed + i`, broken item `i` with
/// `base_seed + count_per_class + i`.
pub fn generate_dataset(count_per_class: usize, base_seed: u64, image_size: usize, dest: &Path) -> Result<DatasetSummary> {
    if count_per_class == 0 {
        return Err(Error::InvalidArgument("count per class must be at least 1".into()));
    }
    let mut summary = DatasetSummary { normal: Vec::new(), broken: Vec::new() };
    for (dir, short, offset, defective) in
        [(NORMAL_DIR, "normal", 0, false), (BROKEN_DIR, "broken", count_per_class as u64, true)]
    {
        let class_dir = dest.join(dir);
        fs::create_dir_all(&class_dir).map_err(|e| Error::io(&class_dir, e))?;
        for i in 0..count_per_class {
            let seed = base_seed.wrapping_add(offset).wrapping_add(i as u64);
            let spec = sample_spec(image_size, seed, defective.then_some(i));
            let path = class_dir.join(format!("gear_{short}_{i:04}.ppm"));
            pnm::write_file(&path, &pnm::save_ppm(&render_gear(&spec)?))?;
            if defective {
                summary.broken.push(path);
            } else {
                summary.normal.push(path);
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn foreground_count(img: &RgbImage, fg: u8) -> usize {
        img.pixels().iter().filter(|p| p[0] == fg).count()
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = GearSpec { noise_sigma: 5.0, ..fixture_missing_tooth() };
        assert_eq!(render_gear(&spec).unwrap(), render_gear(&spec).unwrap());
    }

    #[test]
    fn noiseless_render_has_two_levels() {
        let spec = GearSpec { background: 0, foreground: 200, ..fixture_intact() };
        let img = render_gear(&spec).unwrap();
        let mut levels: Vec<u8> = img.pixels().iter().map(|p| p[0]).collect();
        levels.sort();
        levels.dedup();
        assert_eq!(levels, [0, 200]);
        assert!(img.pixels().iter().all(|p| p[0] == p[1] && p[1] == p[2]));
    }

    #[test]
    fn defects_remove_foreground() {
        let intact = render_gear(&fixture_intact()).unwrap();
        let missing = render_gear(&fixture_missing_tooth()).unwrap();
        let crack = render_gear(&GearSpec { defect: Defect::Crack { angle: 1.0, width: 3.0 }, ..fixture_intact() }).unwrap();
        let fg = fixture_intact().foreground;
        let n = foreground_count(&intact, fg);
        assert!(foreground_count(&missing, fg) < n);
        assert!(foreground_count(&crack, fg) < n);
    }

    #[test]
    fn sampled_specs_are_valid_and_defects_visible() {
        for i in 0..60u64 {
            for defect in [None, Some(i as usize)] {
                let spec = sample_spec(128, 1000 + i, defect);
                spec.validate().unwrap();
                if defect.is_some() {
                    let clean = GearSpec { defect: Defect::None, ..spec.clone() };
                    assert_ne!(render_gear(&spec).unwrap(), render_gear(&clean).unwrap());
                }
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = fixture_intact();
        let cases = [
            GearSpec { image_size: 16, ..base.clone() },
            GearSpec { root_radius: 60.0, ..base.clone() },
            GearSpec { teeth: 5, ..base.clone() },
            GearSpec { foreground: 10, ..base.clone() },
            GearSpec { defect: Defect::MissingTooth(10), ..base.clone() },
            GearSpec { noise_sigma: -1.0, ..base.clone() },
        ];
        for spec in cases {
            assert!(matches!(render_gear(&spec), Err(Error::InvalidGear(_))), "{spec:?}");
        }
    }

    #[test]
    fn minimal_dataset_has_two_files() {
        let dir = tempfile::tempdir().unwrap();
        let summary = generate_dataset(1, 5, 64, dir.path()).unwrap();
        assert_eq!(summary.total(), 2);
        assert!(dir.path().join("normal_gear/gear_normal_0000.ppm").is_file());
        assert!(dir.path().join("broken_gear/gear_broken_0000.ppm").is_file());
        assert!(generate_dataset(0, 5, 64, dir.path()).is_err());
    }
}
