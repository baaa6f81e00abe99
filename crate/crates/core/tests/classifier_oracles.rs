mod common;

use gearlens::classifier::{evaluate_features, fit, loss_and_grad, SoftmaxHead, TrainConfig};
use gearlens::rng::SplitMix64;

#[test]
fn analytic_gradient_matches_finite_differences() {
    let worst = common::gradient_check(100, 17, 1e-5);
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn gradient_check_detects_a_wrong_gradient() {
    // Sanity check on the oracle itself: a sign-flipped gradient must fail it.
    let mut rng = SplitMix64::new(3);
    let ext = common::tiny_extractor();
    let head = common::random_head(&mut rng, ext, 1.0);
    let batch = common::random_batch(&mut rng, ext.dimension(), 4);
    let (_, g) = loss_and_grad(&head, &batch).unwrap();
    let h = 1e-5;
    let bumped = |delta: f64| {
        let mut b = head.bias().to_vec();
        b[0] += delta;
        SoftmaxHead::from_parts(head.weights().to_vec(), b, ext).unwrap()
    };
    let numeric = (loss_and_grad(&bumped(h), &batch).unwrap().0 - loss_and_grad(&bumped(-h), &batch).unwrap().0) / (2.0 * h);
    assert!((numeric - g.bias[0]).abs() < 1e-8);
    assert!((numeric + g.bias[0]).abs() > 1e-6);
}

#[test]
fn small_step_descent_is_monotone() {
    let mut rng = SplitMix64::new(8);
    let ext = common::tiny_extractor();
    let batch = common::random_batch(&mut rng, ext.dimension(), 40);
    let worst = common::worst_loss_increase(ext, &batch, 0.01, 200);
    assert!(worst <= 1e-9, "loss rose by {worst:e}");
}

#[test]
fn toy_set_matches_logistic_regression() {
    let ext = common::tiny_extractor();
    let toy = common::toy_set(ext.dimension());
    let mut cfg = TrainConfig::new(500, 0.5, 0);
    cfg.eval_interval = 100;
    let (head, trace) = fit(ext, &toy, &toy, &cfg).unwrap();
    let (acc, ce) = evaluate_features(&head, &toy).unwrap();
    assert_eq!(acc, 1.0);
    assert!(ce < trace.train[0].cross_entropy);
    assert_eq!(trace.train[0].cross_entropy, std::f64::consts::LN_2);

    let oracle = common::logistic_oracle(&toy, 0.5, 500);
    for ((x, _), expected) in toy.iter().zip(oracle) {
        let p = head.predict_features(x).unwrap().normal();
        assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
    }
}

#[test]
fn validation_is_recorded_on_interval_and_final_step() {
    let ext = common::tiny_extractor();
    let toy = common::toy_set(ext.dimension());
    let mut cfg = TrainConfig::new(25, 0.1, 0);
    cfg.eval_interval = 10;
    let (_, trace) = fit(ext, &toy, &toy, &cfg).unwrap();
    assert_eq!(trace.train.len(), 25);
    let steps: Vec<usize> = trace.validation.iter().map(|r| r.step).collect();
    assert_eq!(steps, [10, 20, 25]);
}
