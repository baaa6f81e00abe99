//! Trainable softmax head over extracted features.
//!
//! Training is full-batch gradient descent on mean cross-entropy from a
//! zero-initialised head. The objective is convex, so with zero init the
//! whole optimisation path is a pure function of the training features.

use crate::dataset::{split_dataset, Label, LabeledImage, SplitRatios};
use crate::error::{Error, Result};
use crate::features::{extract_features, ExtractorConfig, FeatureVector};
use crate::image::RgbImage;

/// Floor applied to the true-class probability inside the log.
pub const CE_EPSILON: f64 = 1e-12;

/// Per-class probabilities in [`Label::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities(Vec<f64>);

impl Probabilities {
    /// Wraps raw values without checking that they form a distribution.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// Two-class distribution from its normal/broken parts.
    pub fn binary(normal: f64, broken: f64) -> Self {
        Self(vec![normal, broken])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn of(&self, label: Label) -> f64 {
        self.0[label.index()]
    }

    pub fn normal(&self) -> f64 {
        self.of(Label::NormalGear)
    }

    pub fn broken(&self) -> f64 {
        self.of(Label::BrokenGear)
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Result<Probabilities> {
    if logits.is_empty() {
        return Err(Error::InvalidArgument("softmax of no logits".into()));
    }
    if let Some(bad) = logits.iter().find(|z| !z.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite logit {bad}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(Probabilities(exps.into_iter().map(|e| e / total).collect()))
}

pub fn cross_entropy(probs: &Probabilities, truth: Label) -> f64 {
    -probs.of(truth).max(CE_EPSILON).ln()
}

/// Label whose probability strictly exceeds 0.5; an exact tie goes to
/// [`Label::BrokenGear`] so the part is routed to review.
pub fn classify(probs: &Probabilities) -> Label {
    if probs.normal() > 0.5 {
        Label::NormalGear
    } else {
        Label::BrokenGear
    }
}

/// Linear layer plus softmax, bound to the extractor that feeds it.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    extractor: ExtractorConfig,
}

impl SoftmaxHead {
    pub fn zeros(extractor: ExtractorConfig) -> Self {
        let d = extractor.dimension();
        let c = Label::ALL.len();
        Self { weights: vec![vec![0.0; d]; c], bias: vec![0.0; c], extractor }
    }

    pub fn from_parts(weights: Vec<Vec<f64>>, bias: Vec<f64>, extractor: ExtractorConfig) -> Result<Self> {
        let c = Label::ALL.len();
        if weights.len() != c || bias.len() != c {
            return Err(Error::DimensionMismatch { expected: c, actual: weights.len().max(bias.len()) });
        }
        if let Some(row) = weights.iter().find(|r| r.len() != extractor.dimension()) {
            return Err(Error::DimensionMismatch { expected: extractor.dimension(), actual: row.len() });
        }
        Ok(Self { weights, bias, extractor })
    }

    pub fn class_names(&self) -> [&'static str; 2] {
        Label::ALL.map(Label::as_str)
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn extractor(&self) -> &ExtractorConfig {
        &self.extractor
    }

    pub fn dimension(&self) -> usize {
        self.extractor.dimension()
    }

    fn check(&self, x: &FeatureVector) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), actual: x.len() });
        }
        Ok(())
    }

    pub fn logits(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x.values()).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect())
    }

    pub fn predict_features(&self, x: &FeatureVector) -> Result<Probabilities> {
        softmax(&self.logits(x)?)
    }

    /// `W ← W − lr·dW`, `b ← b − lr·db`.
    pub fn step(&self, grad: &Gradient, learning_rate: f64) -> Self {
        let weights = self
            .weights
            .iter()
            .zip(&grad.weights)
            .map(|(row, g)| row.iter().zip(g).map(|(w, d)| w - learning_rate * d).collect())
            .collect();
        let bias = self.bias.iter().zip(&grad.bias).map(|(b, d)| b - learning_rate * d).collect();
        Self { weights, bias, extractor: self.extractor }
    }
}

pub fn predict(head: &SoftmaxHead, image: &RgbImage) -> Probabilities {
    head.predict_features(&extract_features(image, head.extractor()))
        .expect("extractor output matches the head it is bound to")
}

/// Gradient of the mean loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn max_abs(&self) -> f64 {
        self.weights.iter().flatten().chain(&self.bias).fold(0.0, |m, g| m.max(g.abs()))
    }
}

pub type Example = (FeatureVector, Label);

/// Mean cross-entropy over `batch` and its gradient: `(p − y) ⊗ x` for the
/// weights and `p − y` for the bias, averaged over the batch.
pub fn loss_and_grad(head: &SoftmaxHead, batch: &[Example]) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let c = head.weights.len();
    let d = head.dimension();
    let mut grad = Gradient { weights: vec![vec![0.0; d]; c], bias: vec![0.0; c] };
    let mut loss = 0.0;
    for (x, label) in batch {
        let p = head.predict_features(x)?;
        loss += cross_entropy(&p, *label);
        for (k, pk) in p.values().iter().enumerate() {
            let delta = pk - if k == label.index() { 1.0 } else { 0.0 };
            grad.bias[k] += delta;
            for (g, v) in grad.weights[k].iter_mut().zip(x.values()) {
                *g += delta * v;
            }
        }
    }
    let n = batch.len() as f64;
    grad.bias.iter_mut().for_each(|g| *g /= n);
    grad.weights.iter_mut().flatten().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Accuracy and mean cross-entropy over pre-extracted examples.
pub fn evaluate_features(head: &SoftmaxHead, examples: &[Example]) -> Result<(f64, f64)> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on no items".into()));
    }
    let mut correct = 0usize;
    let mut loss = 0.0;
    for (x, label) in examples {
        let p = head.predict_features(x)?;
        correct += usize::from(classify(&p) == *label);
        loss += cross_entropy(&p, *label);
    }
    let n = examples.len() as f64;
    Ok((correct as f64 / n, loss / n))
}

pub fn evaluate(head: &SoftmaxHead, items: &[LabeledImage]) -> Result<(f64, f64)> {
    evaluate_features(head, &extract_all(items, head.extractor()))
}

pub fn extract_all(items: &[LabeledImage], config: &ExtractorConfig) -> Vec<Example> {
    items.iter().map(|i| (extract_features(&i.image, config), i.label)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub eval_interval: usize,
    pub ratios: SplitRatios,
}

impl TrainConfig {
    pub fn new(steps: usize, learning_rate: f64, seed: u64) -> Self {
        Self { steps, learning_rate, seed, eval_interval: 10.min(steps.max(1)), ratios: SplitRatios::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.eval_interval == 0 || self.eval_interval > self.steps {
            return Err(Error::InvalidArgument(format!(
                "eval interval {} must be in 1..={}",
                self.eval_interval, self.steps
            )));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(1000, 0.1, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub cross_entropy: f64,
    pub accuracy: f64,
}

/// Metrics of the head as it stood at the start of each step, i.e. the
/// same forward pass that produced that step's gradient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub train: Vec<StepRecord>,
    pub validation: Vec<StepRecord>,
}

/// Runs `cfg.steps` gradient-descent updates from a zero head.
pub fn fit(
    extractor: ExtractorConfig,
    train: &[Example],
    validation: &[Example],
    cfg: &TrainConfig,
) -> Result<(SoftmaxHead, TrainingTrace)> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Dataset("training and validation parts must be non-empty".into()));
    }
    if !Label::ALL.iter().all(|l| train.iter().any(|(_, t)| t == l)) {
        return Err(Error::Dataset("training part contains a single class".into()));
    }

    let mut head = SoftmaxHead::zeros(extractor);
    let mut trace = TrainingTrace::default();
    for step in 1..=cfg.steps {
        let (loss, grad) = loss_and_grad(&head, train)?;
        let (accuracy, _) = evaluate_features(&head, train)?;
        trace.train.push(StepRecord { step, cross_entropy: loss, accuracy });
        if step % cfg.eval_interval == 0 || step == cfg.steps {
            let (accuracy, cross_entropy) = evaluate_features(&head, validation)?;
            trace.validation.push(StepRecord { step, cross_entropy, accuracy });
        }
        head = head.step(&grad, cfg.learning_rate);
    }
    Ok((head, trace))
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub head: SoftmaxHead,
    pub trace: TrainingTrace,
    pub test_accuracy: f64,
    pub test_cross_entropy: f64,
}

/// Splits `items`, extracts features once, fits the head and scores the
/// held-out test part with the final weights.
pub fn train(items: &[LabeledImage], cfg: &TrainConfig, extractor: ExtractorConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let split = split_dataset(items, cfg.ratios, cfg.seed)?;
    if split.test.is_empty() {
        return Err(Error::Dataset("test part is empty".into()));
    }
    let train_set = extract_all(&split.train, &extractor);
    let validation_set = extract_all(&split.validation, &extractor);
    let test_set = extract_all(&split.test, &extractor);
    let (head, trace) = fit(extractor, &train_set, &validation_set, cfg)?;
    let (test_accuracy, test_cross_entropy) = evaluate_features(&head, &test_set)?;
    Ok(TrainOutcome { head, trace, test_accuracy, test_cross_entropy })
}
