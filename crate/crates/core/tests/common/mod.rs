//! Brute-force reference implementations shared by the integration tests.
//!
//! These deliberately avoid the library's filter code: blur is a direct 2-D
//! correlation with the full outer-product Gaussian, and Sobel is written
//! out tap by tap.

#![allow(dead_code)]

use gearlens::image::GrayImage;

fn clamp_at(img: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let cx = x.clamp(0, w as isize - 1) as usize;
    let cy = y.clamp(0, h as isize - 1) as usize;
    img[cy * w + cx]
}

/// Normalised 1-D Gaussian taps, computed independently of the library.
pub fn taps(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-half..=half).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Direct 2-D blur with the outer-product kernel, replicate borders, rounded.
pub fn blur_direct(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let src: Vec<f64> = img.as_raw().iter().map(|&v| v as f64).collect();
    let t = taps(sigma);
    let half = (t.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for (i, ty) in t.iter().enumerate() {
                for (j, tx) in t.iter().enumerate() {
                    acc += ty * tx * clamp_at(&src, w, h, x + j as isize - half, y + i as isize - half);
                }
            }
            out[y as usize * w + x as usize] = acc.round().clamp(0.0, 255.0);
        }
    }
    out
}

/// |Sobel X| and |Sobel Y| with replicate borders.
pub fn sobel_abs(img: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| clamp_at(img, w, h, x + dx, y + dy);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            gx[y as usize * w + x as usize] = sx.abs();
            gy[y as usize * w + x as usize] = sy.abs();
        }
    }
    (gx, gy)
}

/// Pixels of the first tooth's sector (middle half of its angular span)
/// within 3 px of the root circle.
pub fn first_tooth_region(size: usize, root_radius: f64, teeth: usize) -> Vec<(usize, usize)> {
    let c = size as f64 / 2.0;
    let span = std::f64::consts::TAU / teeth as f64 / 2.0;
    let mut out = Vec::new();
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
            let r = dx.hypot(dy);
            let theta = dy.atan2(dx).rem_euclid(std::f64::consts::TAU);
            if (r - root_radius).abs() <= 3.0 && theta >= span * 0.25 && theta <= span * 0.75 {
                out.push((x, y));
            }
        }
    }
    out
}

use gearlens::classifier::{loss_and_grad, Example, SoftmaxHead};
use gearlens::dataset::Label;
use gearlens::features::{ExtractorConfig, FeatureVector};
use gearlens::filters::GaussianSpec;
use gearlens::rng::SplitMix64;

/// A one-cell extractor: D = 6, small enough for exhaustive checks.
pub fn tiny_extractor() -> ExtractorConfig {
    ExtractorConfig::new(16, GaussianSpec::default(), 1).unwrap()
}

pub fn random_head(rng: &mut SplitMix64, extractor: ExtractorConfig, scale: f64) -> SoftmaxHead {
    let d = extractor.dimension();
    let weights = (0..2).map(|_| (0..d).map(|_| rng.uniform(-scale, scale)).collect()).collect();
    let bias = (0..2).map(|_| rng.uniform(-scale, scale)).collect();
    SoftmaxHead::from_parts(weights, bias, extractor).unwrap()
}

pub fn random_batch(rng: &mut SplitMix64, d: usize, n: usize) -> Vec<Example> {
    (0..n)
        .map(|_| {
            let x = FeatureVector::new((0..d).map(|_| rng.next_f64()).collect());
            (x, Label::from_index(rng.below(2) as usize).unwrap())
        })
        .collect()
}

fn with_param(head: &SoftmaxHead, k: usize, j: Option<usize>, delta: f64) -> SoftmaxHead {
    let mut weights = head.weights().to_vec();
    let mut bias = head.bias().to_vec();
    match j {
        Some(j) => weights[k][j] += delta,
        None => bias[k] += delta,
    }
    SoftmaxHead::from_parts(weights, bias, *head.extractor()).unwrap()
}

/// Largest component-wise relative error between the analytic gradient and
/// central differences with step `h`, over `cases` random heads and batches.
///
/// Relative error is `|a − n| / max(|a|, |n|, 1e-4)`; the floor keeps
/// components that are zero up to rounding from dominating.
pub fn gradient_check(cases: usize, seed: u64, h: f64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let extractor = tiny_extractor();
    let d = extractor.dimension();
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let head = random_head(&mut rng, extractor, 1.0);
        let n = 1 + rng.below(8) as usize;
        let batch = random_batch(&mut rng, d, n);
        let (_, grad) = loss_and_grad(&head, &batch).unwrap();
        let loss = |h: &SoftmaxHead| loss_and_grad(h, &batch).unwrap().0;
        for k in 0..2 {
            for j in (0..d).map(Some).chain([None]) {
                let numeric = (loss(&with_param(&head, k, j, h)) - loss(&with_param(&head, k, j, -h))) / (2.0 * h);
                let analytic = j.map_or(grad.bias[k], |j| grad.weights[k][j]);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4);
                worst = worst.max(rel);
            }
        }
    }
    worst
}

/// Largest per-step loss increase over `steps` full-batch updates from zero.
pub fn worst_loss_increase(extractor: ExtractorConfig, batch: &[Example], lr: f64, steps: usize) -> f64 {
    let mut head = SoftmaxHead::zeros(extractor);
    let mut previous = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        let (loss, grad) = loss_and_grad(&head, batch).unwrap();
        if previous.is_finite() {
            worst = worst.max(loss - previous);
        }
        previous = loss;
        head = head.step(&grad, lr);
    }
    worst
}

/// Binary logistic regression on the logit difference `z = v·x + c`, trained
/// by gradient descent from zero. Two-class softmax GD at rate `lr` moves
/// the difference at rate `2·lr`, so this returns P(normal) per example.
pub fn logistic_oracle(batch: &[Example], lr: f64, steps: usize) -> Vec<f64> {
    let d = batch[0].0.len();
    let (mut v, mut c) = (vec![0.0; d], 0.0);
    let sigmoid = |z: f64| 1.0 / (1.0 + (-z).exp());
    let prob = |v: &[f64], c: f64, x: &FeatureVector| sigmoid(v.iter().zip(x.values()).map(|(a, b)| a * b).sum::<f64>() + c);
    let n = batch.len() as f64;
    for _ in 0..steps {
        let mut gv = vec![0.0; d];
        let mut gc = 0.0;
        for (x, label) in batch {
            let y = if *label == Label::NormalGear { 1.0 } else { 0.0 };
            let r = prob(&v, c, x) - y;
            gc += r / n;
            gv.iter_mut().zip(x.values()).for_each(|(g, xi)| *g += r * xi / n);
        }
        v.iter_mut().zip(&gv).for_each(|(vi, g)| *vi -= 2.0 * lr * g);
        c -= 2.0 * lr * gc;
    }
    batch.iter().map(|(x, _)| prob(&v, c, x)).collect()
}

/// Four linearly separable points in the first two coordinates.
pub fn toy_set(d: usize) -> Vec<Example> {
    [([0.9, 0.1], Label::NormalGear), ([0.8, 0.3], Label::NormalGear), ([0.1, 0.9], Label::BrokenGear), ([0.3, 0.7], Label::BrokenGear)]
        .into_iter()
        .map(|(xy, label)| {
            let mut v = vec![0.0; d];
            v[..2].copy_from_slice(&xy);
            (FeatureVector::new(v), label)
        })
        .collect()
}
