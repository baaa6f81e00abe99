mod common;

use gearlens::filters::{apply_filter_bank, convolve, gaussian_blur_gray, BorderPolicy, GaussianSpec, Kernel};
use gearlens::image::{rgb_to_gray, GrayImage};
use gearlens::rng::SplitMix64;
use gearlens::synthgear::{fixture_intact, fixture_missing_tooth, render_gear};

fn random_image(rng: &mut SplitMix64) -> GrayImage {
    let w = 1 + rng.below(64) as usize;
    let h = 1 + rng.below(64) as usize;
    GrayImage::from_fn(w, h, |_, _| rng.below(256) as u8).unwrap()
}

#[test]
fn separable_blur_matches_direct_convolution() {
    let mut rng = SplitMix64::new(99);
    for case in 0..20 {
        let img = random_image(&mut rng);
        let sigma = rng.uniform(0.3, 4.0);
        let fast = gaussian_blur_gray(&img, &GaussianSpec::isotropic(sigma).unwrap());
        let slow = common::blur_direct(&img, sigma);
        for (i, (&a, &b)) in fast.as_raw().iter().zip(&slow).enumerate() {
            assert!((a as f64 - b).abs() <= 1.0, "case {case} pixel {i}: {a} vs {b} (sigma {sigma})");
        }
    }
}

#[test]
fn identity_kernel_is_identity() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..10 {
        let img = random_image(&mut rng);
        for border in [BorderPolicy::Replicate, BorderPolicy::Zero] {
            let out = convolve(&img, &Kernel::identity(), border);
            assert!(out.values().iter().zip(img.as_raw()).all(|(&a, &b)| a == b as f64));
        }
    }
}

fn strong_sobel_x(sigma: f64) -> usize {
    let gray = rgb_to_gray(&render_gear(&fixture_intact()).unwrap());
    let bank = apply_filter_bank(&gray, &GaussianSpec::isotropic(sigma).unwrap());
    bank["sobel_x"].as_raw().iter().filter(|&&v| v > 64).count()
}

#[test]
fn heavy_blur_erases_edges() {
    // Reference counts from the brute-force oracle: 4014 at sigma 3, 0 at sigma 13.
    let (mild, heavy) = (strong_sobel_x(3.0), strong_sobel_x(13.0));
    assert!(heavy < mild, "{heavy} !< {mild}");
    assert!(mild.abs_diff(4014) <= 40, "{mild}");
    assert_eq!(heavy, 0);
}

fn strong_edges_near_first_tooth(spec: &gearlens::synthgear::GearSpec) -> (usize, usize) {
    let gray = rgb_to_gray(&render_gear(spec).unwrap());
    let region = common::first_tooth_region(spec.image_size, spec.root_radius, spec.teeth);
    let bank = apply_filter_bank(&gray, &GaussianSpec::default());
    let lib = region
        .iter()
        .filter(|&&(x, y)| bank["sobel_x"].get(x, y).max(bank["sobel_y"].get(x, y)) > 128)
        .count();

    let blurred = common::blur_direct(&gray, 1.0);
    let (gx, gy) = common::sobel_abs(&blurred, spec.image_size, spec.image_size);
    let oracle = region
        .iter()
        .filter(|&&(x, y)| gx[y * spec.image_size + x].max(gy[y * spec.image_size + x]).min(255.0) > 128.0)
        .count();
    (lib, oracle)
}

#[test]
fn missing_tooth_lights_up_root_arc() {
    let (lib, oracle) = strong_edges_near_first_tooth(&fixture_missing_tooth());
    assert_eq!(oracle, 31);
    assert!(lib.abs_diff(oracle) <= 2, "{lib} vs {oracle}");

    let (lib, oracle) = strong_edges_near_first_tooth(&fixture_intact());
    assert_eq!((lib, oracle), (0, 0));
}
